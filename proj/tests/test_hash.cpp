// SHA-256 / HMAC-SHA-256 against the published FIPS 180-4 and RFC 4231
// vectors, plus streaming-vs-oneshot consistency.

#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "slice/detail/sha256.hpp"

using slice::detail::HmacSha256;
using slice::detail::Sha256;

namespace {

std::string to_hex(const Sha256::Digest& d) {
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (std::uint8_t b : d) {
        out.push_back(hex[b >> 4]);
        out.push_back(hex[b & 0xf]);
    }
    return out;
}

std::vector<std::uint8_t> bytes_of(std::string_view s) {
    return {s.begin(), s.end()};
}

}  // namespace

TEST_CASE("sha256 matches FIPS 180-4 vectors") {
    CHECK(to_hex(Sha256::hash(bytes_of("abc"))) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(to_hex(Sha256::hash(bytes_of(""))) ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(to_hex(Sha256::hash(bytes_of(
              "abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq"))) ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST_CASE("sha256 streaming equals one-shot for every chunking") {
    std::vector<std::uint8_t> msg;
    for (int i = 0; i < 300; ++i) msg.push_back(static_cast<std::uint8_t>(i * 7 + 3));
    auto oneshot = Sha256::hash(msg);
    for (std::size_t chunk : {1u, 3u, 17u, 63u, 64u, 65u, 128u}) {
        Sha256 h;
        for (std::size_t off = 0; off < msg.size(); off += chunk)
            h.update(msg.data() + off, std::min(chunk, msg.size() - off));
        CHECK(h.finish() == oneshot);
    }
}

TEST_CASE("sha256 padding boundary lengths") {
    // 55, 56, 63, 64 bytes straddle the length-field block boundary.
    for (std::size_t len : {55u, 56u, 63u, 64u, 119u, 120u}) {
        std::vector<std::uint8_t> msg(len, 0x61);
        Sha256 a;
        a.update(msg.data(), msg.size());
        CHECK(a.finish() == Sha256::hash(msg));
    }
    // 64 x 'a' has a known digest.
    std::vector<std::uint8_t> msg(64, 0x61);
    CHECK(to_hex(Sha256::hash(msg)) ==
          "ffe054fe7ae0cb6dc65c3af9b61d5209f439851db43d0ba5997337df154668eb");
}

TEST_CASE("hmac-sha256 matches RFC 4231 vectors") {
    {
        std::vector<std::uint8_t> key(20, 0x0b);
        HmacSha256 mac(key);
        CHECK(to_hex(mac.mac(bytes_of("Hi There"))) ==
              "b0344c61d8db38535ca8afceaf0bf12b881dc200c9833da726e9376c2e32cff7");
    }
    {
        HmacSha256 mac(bytes_of("Jefe"));
        CHECK(to_hex(mac.mac(bytes_of("what do ya want for nothing?"))) ==
              "5bdcc146bf60754e6a042426089575c75a003f089d2739839dec58b964ec3843");
    }
    {
        std::vector<std::uint8_t> key(131, 0xaa);  // longer than the block size
        HmacSha256 mac(key);
        CHECK(to_hex(mac.mac(bytes_of("Test Using Larger Than Block-Size Key - Hash Key First"))) ==
              "60e431591ee0b67f0d8a26aacbf5b77f8e0bc6213728c5140546040f0ee37f54");
    }
}

TEST_CASE("hmac key schedule is reusable across messages") {
    std::vector<std::uint8_t> key(32, 0x42);
    HmacSha256 mac(key);
    auto first = mac.mac(bytes_of("one"));
    mac.mac(bytes_of("two"));
    CHECK(mac.mac(bytes_of("one")) == first);
}
