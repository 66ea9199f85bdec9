#include <doctest.h>

#include <vaoi/critical_rate.hpp>

#include "support.hpp"

using namespace vaoi;

namespace {

CriticalRateQuery query(int k, int n, int s, int m, double lambda_s, double epsilon) {
  CriticalRateQuery q;
  q.k = k;
  q.n = n;
  q.s = s;
  q.m = m;
  q.lambda_s = lambda_s;
  q.epsilon = epsilon;
  return q;
}

double gap_at(const CriticalRateQuery& q, double lambda_e) {
  NetworkType type = classify_network(q.n, q.s, q.m);
  return detail::scheme_gap(q, type, lambda_e);
}

} // namespace

TEST_CASE("returned rate closes the gap and is not loose") {
  for (double eps : {1.0, 0.1, 0.01}) {
    CriticalRateQuery q = query(2, 6, 6, 6, 10.0, eps);
    CriticalRateResult r = critical_gossip_rate(q);
    CHECK(r.rate > 0.0);
    CHECK(r.gap_at_rate <= eps);
    CHECK(gap_at(q, 0.99 * r.rate) > eps);
    CHECK_FALSE(r.bound_only);
  }
}

TEST_CASE("rate grows as the margin shrinks and as the threshold grows") {
  double prev_eps_rate = 0.0;
  for (double eps : {1.0, 0.1, 0.01}) {
    CriticalRateResult r = critical_gossip_rate(query(3, 8, 8, 8, 12.0, eps));
    CHECK(r.rate > prev_eps_rate);
    prev_eps_rate = r.rate;
  }
  // With k = 1 and every node holding a key, the two schemes coincide (both
  // averages are lambda_s / lambda_e), so the gap is zero and no gossip is
  // needed at all; the rate then rises strictly with every further k.
  double prev_k_rate = -1.0;
  for (int k = 1; k <= 6; ++k) {
    CriticalRateResult r = critical_gossip_rate(query(k, 8, 8, 8, 12.0, 0.1));
    CHECK(r.rate > prev_k_rate);
    if (k == 1) CHECK(r.rate == 0.0);
    prev_k_rate = r.rate;
  }
}

TEST_CASE("total-key and partial-key queries carry the bound flag") {
  CHECK_FALSE(critical_gossip_rate(query(2, 6, 6, 10, 10.0, 0.5)).bound_only);
  CriticalRateResult part = critical_gossip_rate(query(2, 6, 3, 10, 10.0, 0.5));
  CHECK(part.bound_only);
  CHECK(part.rate > 0.0);
  CHECK(part.gap_at_rate <= 0.5);
}

TEST_CASE("an enormous margin needs no gossip at all") {
  // At the floor rate the gap here is around 1e12, so 1e15 is already met by
  // a vanishing gossip rate and the solver reports zero.
  CriticalRateResult r = critical_gossip_rate(query(2, 6, 6, 6, 10.0, 1e15));
  CHECK(r.rate == 0.0);
  CHECK(r.gap_at_rate <= 1e15);
}

TEST_CASE("query validation") {
  CHECK_THROWS_AS(critical_gossip_rate(query(2, 6, 6, 6, 10.0, 0.0)), DomainError);
  CHECK_THROWS_AS(critical_gossip_rate(query(2, 6, 6, 6, 10.0, -1.0)), DomainError);
  CHECK_THROWS_AS(critical_gossip_rate(query(6, 6, 6, 6, 10.0, 0.1)), ConfigError);
}

TEST_CASE("the gap itself shrinks monotonically along rates") {
  CriticalRateQuery q = query(4, 10, 10, 10, 15.0, 0.1);
  double prev = 1e300;
  for (double le : {30.0, 60.0, 120.0, 240.0, 480.0}) {
    double g = gap_at(q, le);
    CHECK(g < prev);
    CHECK(g >= 0.0);
    prev = g;
  }
}
