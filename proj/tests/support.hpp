#pragma once

// Fixtures shared by the unit and acceptance tests.

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "facesim/corpus.hpp"
#include "facesim/rng.hpp"

namespace facesim::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("facesim_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline Vector random_vector(Rng& rng, std::size_t d) {
  Vector v(d);
  for (double& x : v) x = rng.normal();
  return v;
}

inline double brute_cosine(const Vector& u, const Vector& v) {
  long double uv = 0, uu = 0, vv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    uv += static_cast<long double>(u[i]) * v[i];
    uu += static_cast<long double>(u[i]) * u[i];
    vv += static_cast<long double>(v[i]) * v[i];
  }
  return static_cast<double>(uv / std::sqrt(uu * vv));
}

inline TripletSample make_sample(std::string id, std::string c, std::string a, std::string b,
                                 std::vector<Choice> votes) {
  TripletSample s;
  s.triplet_id = std::move(id);
  s.ref_id = std::move(c);
  s.option_a_id = std::move(a);
  s.option_b_id = std::move(b);
  std::size_t na = 0;
  for (Choice v : votes) na += v == Choice::A;
  const std::size_t nb = votes.size() - na;
  s.consistent = na == votes.size() || nb == votes.size();
  if (votes.size() < 3) {
    s.rejection = Rejection::too_few_votes;
  } else if (na == nb) {
    s.rejection = Rejection::tied;
  } else {
    s.majority = na > nb ? Choice::A : Choice::B;
  }
  s.votes = std::move(votes);
  return s;
}

struct IdentityCorpus {
  EmbeddingTable table;
  std::vector<TripletSample> samples;
};

/// Triplets over one target and three distinct sources each, with every
/// (target, source) swap present in the table. A fraction of the triplets
/// gets a 2-1 vote.
inline IdentityCorpus identity_corpus(std::size_t targets, std::size_t sources,
                                      std::size_t triplets, std::uint64_t seed,
                                      double inconsistent_fraction = 0.2, std::size_t dim = 4,
                                      std::size_t pools = 1) {
  Rng rng(seed);
  IdentityCorpus out{EmbeddingTable(dim), {}};
  auto name = [](std::size_t t, std::size_t s) {
    return "sw_t" + std::to_string(t) + "_s" + std::to_string(s);
  };
  for (std::size_t t = 0; t < targets; ++t) {
    for (std::size_t s = 0; s < sources; ++s) {
      EmbeddingRecord r;
      r.image_id = name(t, s);
      r.identity_id = "s" + std::to_string(s);
      r.role = Role::swapped;
      r.target_id = "t" + std::to_string(t);
      r.vector = random_vector(rng, dim);
      out.table.add(std::move(r));
    }
  }
  for (std::size_t i = 0; i < triplets; ++i) {
    const std::size_t t = rng.uniform_index(targets);
    // Target t draws sources from pool t % pools only.
    const std::size_t width = sources / pools, base = (t % pools) * width;
    auto draw = [&] { return base + rng.uniform_index(width); };
    std::size_t s[3];
    s[0] = draw();
    do s[1] = draw(); while (s[1] == s[0]);
    do s[2] = draw(); while (s[2] == s[0] || s[2] == s[1]);
    std::vector<Choice> votes{Choice::A, Choice::A, Choice::A};
    if (rng.uniform01() < inconsistent_fraction) votes[2] = Choice::B;
    out.samples.push_back(make_sample("x" + std::to_string(i), name(t, s[0]), name(t, s[1]),
                                      name(t, s[2]), votes));
  }
  return out;
}

}  // namespace facesim::testing
