#include "doctest.h"

#include <cmath>
#include <vector>

#include "dsinv/core.hpp"
#include "dsinv/rng.hpp"

using namespace dsinv;

namespace {

// Independent oracle: a Poisson number of failure events, each bringing a
// logarithmically distributed count, convolved directly and truncated at n.
// This compound distribution has mean mu*n and variance var*n when
// lambda = -r*ln(p), q = 1-p with r = mean^2/(var-mean), p = mean/var.
std::vector<double> compound_poisson_log_oracle(int n, double mu, double var) {
  const double mean = mu * n;
  const double variance = var * n;
  const double r = mean * mean / (variance - mean);
  const double p = mean / variance;
  const double q = 1.0 - p;
  const double lambda = -r * std::log(p);

  const int support = n + 220;  // leaves a tail far below 1e-12
  std::vector<double> log_pmf(static_cast<std::size_t>(support) + 1, 0.0);
  for (int y = 1; y <= support; ++y)
    log_pmf[static_cast<std::size_t>(y)] =
        -std::pow(q, y) / (y * std::log(1.0 - q));

  std::vector<double> dist(static_cast<std::size_t>(support) + 1, 0.0);
  std::vector<double> conv(static_cast<std::size_t>(support) + 1, 0.0);
  conv[0] = 1.0;  // zero events
  double pois = std::exp(-lambda);
  for (std::size_t k = 0; k < dist.size(); ++k) dist[k] = pois * conv[k];
  for (int events = 1; events < 80; ++events) {
    std::vector<double> next(conv.size(), 0.0);
    for (std::size_t a = 0; a < conv.size(); ++a) {
      if (conv[a] == 0.0) continue;
      for (std::size_t y = 1; a + y < next.size(); ++y)
        next[a + y] += conv[a] * log_pmf[y];
    }
    conv.swap(next);
    pois *= lambda / events;
    for (std::size_t k = 0; k < dist.size(); ++k) dist[k] += pois * conv[k];
  }
  std::vector<double> out(static_cast<std::size_t>(n) + 1, 0.0);
  for (int k = 0; k < n; ++k)
    out[static_cast<std::size_t>(k)] = dist[static_cast<std::size_t>(k)];
  double tail = 0.0;
  for (std::size_t k = static_cast<std::size_t>(n); k < dist.size(); ++k)
    tail += dist[k];
  out[static_cast<std::size_t>(n)] = tail;
  return out;
}

}  // namespace

TEST_CASE("failure_pmf: no items, point mass at zero") {
  const auto pmf = failure_pmf(0, 0.3, 0.3, DemandFamily::kPoisson);
  REQUIRE(pmf.size() == 1);
  CHECK(pmf[0] == doctest::Approx(1.0));
}

TEST_CASE("failure_pmf: truncated poisson closed form") {
  const int n = 10;
  const double mu = 0.025;
  const auto pmf = failure_pmf(n, mu, mu, DemandFamily::kPoisson);
  const double lambda = mu * n;  // 0.25
  CHECK(pmf[0] == doctest::Approx(std::exp(-lambda)).epsilon(1e-12));
  for (int k = 1; k < n; ++k) {
    double expect = std::exp(-lambda);
    for (int j = 1; j <= k; ++j) expect *= lambda / j;
    CHECK(pmf[static_cast<std::size_t>(k)] ==
          doctest::Approx(expect).epsilon(1e-12));
  }
  double total = 0.0;
  for (double v : pmf) total += v;
  CHECK(std::abs(total - 1.0) <= 1e-12);
}

TEST_CASE("failure_pmf: matches the compound-poisson oracle") {
  const int n = 7;
  const double mu = 0.01, var = 0.02;
  const auto pmf = failure_pmf(n, mu, var, DemandFamily::kNegativeBinomial);
  const auto oracle = compound_poisson_log_oracle(n, mu, var);
  REQUIRE(pmf.size() == oracle.size());
  for (std::size_t k = 0; k < pmf.size(); ++k)
    CHECK(std::abs(pmf[k] - oracle[k]) <= 1e-9);
}

TEST_CASE("failure_pmf: rejects variance below mean") {
  CHECK_THROWS_AS(failure_pmf(5, 0.2, 0.1, DemandFamily::kNegativeBinomial),
                  std::invalid_argument);
}

TEST_CASE("failure_pmf: normalization and truncated-mean properties") {
  RngStream rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.next_below(30));
    const double mu = 0.002 + 0.3 * rng.next_uniform();
    const double ratio = 1.0 + 3.0 * rng.next_uniform();
    const bool poisson = rng.next_uniform() < 0.3;
    const double var = poisson ? mu : mu * ratio;
    const auto family =
        poisson ? DemandFamily::kPoisson : DemandFamily::kNegativeBinomial;
    const auto pmf = failure_pmf(n, mu, var, family);
    double total = 0.0, mean = 0.0;
    for (std::size_t k = 0; k < pmf.size(); ++k) {
      CHECK(pmf[k] >= 0.0);
      total += pmf[k];
      mean += static_cast<double>(k) * pmf[k];
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);
    CHECK(mean <= mu * n + 1e-12);  // truncation only removes mass from above
  }
}
