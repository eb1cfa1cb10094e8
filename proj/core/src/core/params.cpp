#include "lgan/core/params.hpp"

#include <cstring>

namespace lgan::core {

void init_uniform(Tensor& t, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& v : t.data()) v = dist(rng);
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h) {
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t checksum(std::span<const Parameter* const> params) {
  std::uint64_t h = kFnvOffset;
  for (const Parameter* p : params) {
    for (double v : p->value.data()) {
      char bytes[sizeof(double)];
      std::memcpy(bytes, &v, sizeof(double));
      h = fnv1a(std::string_view(bytes, sizeof bytes), h);
    }
  }
  return h;
}

void zero_grads(std::span<Parameter* const> params) {
  for (Parameter* p : params) p->zero_grad();
}

}  // namespace lgan::core
