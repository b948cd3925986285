#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "test_helpers.hpp"

using namespace bvib;
using namespace bvib_test;

TEST_CASE("model checkpoints round-trip bit-exactly") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / ("bvib_ckpt_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const std::string path = (dir / "model.ckpt").string();

    RngStream init(321);
    const Encoder enc = make_encoder(12, 8, 4, init);
    const Decoder dec = make_decoder(4, 6, 3, init);
    save_model(path, enc, dec);

    Encoder enc2;
    Decoder dec2;
    load_model(path, enc2, dec2);

    REQUIRE(enc2.input_dim == 12);
    REQUIRE(enc2.hidden_dim == 8);
    REQUIRE(enc2.latent_dim == 4);
    REQUIRE(dec2.num_classes == 3);
    REQUIRE(enc2.trunk.w.data == enc.trunk.w.data);
    REQUIRE(enc2.trunk.b == enc.trunk.b);
    REQUIRE(enc2.mu_head.w.data == enc.mu_head.w.data);
    REQUIRE(enc2.logvar_head.w.data == enc.logvar_head.w.data);
    REQUIRE(dec2.hidden.w.data == dec.hidden.w.data);
    REQUIRE(dec2.hidden.b == dec.hidden.b);
    REQUIRE(dec2.out.w.data == dec.out.w.data);
    REQUIRE(dec2.out.b == dec.out.b);

    // a second save of the loaded model produces identical bytes
    const std::string path2 = (dir / "model2.ckpt").string();
    save_model(path2, enc2, dec2);
    std::ifstream a(path, std::ios::binary), b(path2, std::ios::binary);
    const std::string bytes_a((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    const std::string bytes_b((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    REQUIRE(bytes_a == bytes_b);
    REQUIRE_FALSE(bytes_a.empty());

    SECTION("corrupted magic is rejected") {
        std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
        f.seekp(0);
        f.put('X');
        f.close();
        Encoder e;
        Decoder d;
        REQUIRE_THROWS_AS(load_model(path, e, d), ParseError);
    }

    fs::remove_all(dir);
}
