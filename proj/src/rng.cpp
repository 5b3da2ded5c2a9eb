#include "ssmabc/rng.hpp"

namespace ssmabc {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {
  std::uint64_t s = stream_id ^ 0x6a09e667f3bcc909ULL;
  const std::uint64_t stream_key = splitmix64(s);
  std::uint64_t mix = seed ^ stream_key;
  // one extra round so that (seed, id) and (id, seed) do not collide
  mix = splitmix64(mix) ^ stream_id;
  for (auto& word : state_) {
    word = splitmix64(mix);
  }
}

}  // namespace ssmabc
