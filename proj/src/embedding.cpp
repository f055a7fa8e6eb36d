#include "spoilkit/embedding.hpp"

#include <httplib.h>

#include <cmath>
#include <numbers>
#include <random>

#include "spoilkit/errors.hpp"
#include "spoilkit/jsonl.hpp"
#include "spoilkit/text.hpp"

namespace spoilkit {

void check_unit_vector(const Vector& v, std::size_t dim, std::string_view what) {
  if (v.size() != dim) {
    throw ValidationError(std::string(what) + ": expected dimension " + std::to_string(dim) +
                          ", got " + std::to_string(v.size()));
  }
  double sq = 0.0;
  for (double x : v) sq += x * x;
  if (std::abs(std::sqrt(sq) - 1.0) > kUnitNormTolerance) {
    throw ValidationError(std::string(what) + ": vector is not L2-normalized");
  }
}

OneHotProvider::OneHotProvider(const std::vector<std::string>& vocabulary) {
  for (const auto& t : vocabulary) index_.try_emplace(t, index_.size());
}

OneHotProvider OneHotProvider::from_sequences(const std::vector<TokenSeq>& seqs) {
  std::vector<std::string> vocab;
  for (const auto& s : seqs) vocab.insert(vocab.end(), s.tokens.begin(), s.tokens.end());
  return OneHotProvider(vocab);
}

std::vector<Vector> OneHotProvider::embed(const TokenSeq& tokens) const {
  std::vector<Vector> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens.tokens) {
    auto it = index_.find(t);
    if (it == index_.end()) throw ValidationError("one-hot provider: unknown token '" + t + "'");
    Vector v(index_.size(), 0.0);
    v[it->second] = 1.0;
    out.push_back(std::move(v));
  }
  return out;
}

HashProvider::HashProvider(std::uint64_t seed, std::size_t dimension)
    : seed_(seed), dim_(dimension) {
  if (dim_ == 0) throw ValidationError("hash provider: dimension must be positive");
}

Vector HashProvider::vector_for(const std::string& token) const {
  // mt19937_64's output sequence is fixed by the standard; the distributions
  // are not, so the normal draws are done by hand (Box-Muller).
  std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                    static_cast<std::uint32_t>(text::fnv1a64(token)),
                    static_cast<std::uint32_t>(text::fnv1a64(token) >> 32)};
  std::mt19937_64 rng(seq);
  auto uniform = [&] {
    return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
  };
  Vector v(dim_);
  double sq = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) {
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    v[i] = r * std::cos(2.0 * std::numbers::pi * uniform());
    sq += v[i] * v[i];
  }
  const double norm = std::sqrt(sq);
  if (norm == 0.0) {
    v.assign(dim_, 0.0);
    v[0] = 1.0;
    return v;
  }
  for (double& x : v) x /= norm;
  return v;
}

std::vector<Vector> HashProvider::embed(const TokenSeq& tokens) const {
  std::vector<Vector> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens.tokens) out.push_back(vector_for(t));
  return out;
}

LookupProvider LookupProvider::parse(std::string_view content) {
  LookupProvider p;
  std::size_t line_no = 0;
  for (const auto& line : split_lines(content)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const std::string where = "lookup line " + std::to_string(line_no);
    const Json j = parse_json(line, where);
    std::string token;
    Vector vec;
    try {
      token = j.at("token").get<std::string>();
      vec = j.at("vector").get<Vector>();
    } catch (const Json::exception& e) {
      throw ValidationError(where + ": " + e.what());
    }
    if (p.dim_ == 0) p.dim_ = vec.size();
    if (p.dim_ == 0) throw ValidationError(where + ": empty vector");
    check_unit_vector(vec, p.dim_, where);
    if (!p.table_.emplace(std::move(token), std::move(vec)).second) {
      throw ValidationError(where + ": duplicate token");
    }
  }
  if (p.table_.empty()) throw ValidationError("lookup file holds no vectors");
  return p;
}

LookupProvider LookupProvider::load(const std::filesystem::path& path) {
  return parse(read_file(path));
}

std::vector<Vector> LookupProvider::embed(const TokenSeq& tokens) const {
  std::vector<Vector> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens.tokens) {
    auto it = table_.find(t);
    if (it == table_.end()) throw ValidationError("lookup provider: no vector for '" + t + "'");
    out.push_back(it->second);
  }
  return out;
}

HttpProvider::HttpProvider(std::string base_url, std::string path, std::size_t dimension)
    : base_url_(std::move(base_url)), path_(std::move(path)), dim_(dimension) {
  if (dim_ == 0) {
    const auto probe = request({"the"});
    dim_ = probe.front().size();
    if (dim_ == 0) throw ValidationError("embedding service returned an empty vector");
  }
}

std::vector<Vector> HttpProvider::request(const std::vector<std::string>& tokens) const {
  httplib::Client client(base_url_);
  client.set_connection_timeout(10);
  client.set_read_timeout(120);
  const Json body = {{"tokens", tokens}};
  auto res = client.Post(path_, canonical_json(body), "application/json");
  if (!res) {
    throw IoError("embedding service " + base_url_ + path_ + ": " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw IoError("embedding service returned HTTP " + std::to_string(res->status));
  }
  std::vector<Vector> vectors;
  try {
    vectors = Json::parse(res->body).at("vectors").get<std::vector<Vector>>();
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("embedding service: bad response (") + e.what() + ")");
  }
  if (vectors.size() != tokens.size()) {
    throw ValidationError("embedding service returned " + std::to_string(vectors.size()) +
                          " vectors for " + std::to_string(tokens.size()) + " tokens");
  }
  const std::size_t dim = dim_ != 0 ? dim_ : (vectors.empty() ? 0 : vectors.front().size());
  for (const auto& v : vectors) check_unit_vector(v, dim, "embedding service vector");
  return vectors;
}

std::vector<Vector> HttpProvider::embed(const TokenSeq& tokens) const {
  if (tokens.empty()) return {};
  return request(tokens.tokens);
}

}  // namespace spoilkit
