#include <gtest/gtest.h>

#include <fstream>
#include <nlohmann/json.hpp>
#include <set>

#include "frontguard/digest.hpp"

namespace fg = frontguard;

namespace {

nlohmann::json vectors() {
  std::ifstream in(std::string(FRONTGUARD_FIXTURE_DIR) + "/digest_vectors.json");
  return nlohmann::json::parse(in);
}

}  // namespace

TEST(Digest, Sha256KnownAnswer) {
  const std::string abc = "abc";
  const auto d = fg::sha256({reinterpret_cast<const std::uint8_t*>(abc.data()), abc.size()});
  EXPECT_EQ(fg::to_hex(d), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Digest, MatchesReferenceVectors) {
  const auto doc = vectors();
  ASSERT_FALSE(doc["make_commit"].empty());
  for (const auto& v : doc["make_commit"]) {
    const auto sender = fg::from_hex<20>(v["sender"].get<std::string>());
    std::optional<fg::Address> target;
    if (!v["target"].is_null()) target = fg::from_hex<20>(v["target"].get<std::string>());
    EXPECT_EQ(fg::to_hex(fg::make_commit(sender, v["payload"].get<std::string>(), target)),
              v["digest"].get<std::string>())
        << v.dump();
  }
}

TEST(Digest, HexRoundTrip) {
  fg::Address a{};
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = static_cast<std::uint8_t>(i * 13);
  EXPECT_EQ(fg::from_hex<20>(fg::to_hex(a)), a);
  EXPECT_THROW(fg::from_hex<20>("abc"), fg::Error);
  EXPECT_THROW(fg::from_hex<2>("zz00"), fg::Error);
}

TEST(Digest, RejectsNulPayload) {
  EXPECT_THROW(fg::make_commit(fg::Address{}, std::string("a\0b", 3)), fg::Error);
}

TEST(Digest, DependsOnEveryInput) {
  fg::Address a{}, b{};
  b[19] = 1;
  std::set<fg::Digest> seen;
  for (const auto& sender : {a, b})
    for (const std::string payload : {"m1", "m2"}) {
      seen.insert(fg::make_commit(sender, payload));
      seen.insert(fg::make_commit(sender, payload, a));
      seen.insert(fg::make_commit(sender, payload, b));
    }
  EXPECT_EQ(seen.size(), 12u);
}

TEST(Digest, Deterministic) {
  fg::Address a{};
  a[0] = 0xaa;
  EXPECT_EQ(fg::make_commit(a, "transfer"), fg::make_commit(a, "transfer"));
}
