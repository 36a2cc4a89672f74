#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>
#include <vector>

#include "predictor.hpp"
#include "proposal.hpp"
#include "test_support.hpp"

using namespace am;

namespace {

std::vector<double> q_of(std::vector<double> g, ClampPolicy clamp) {
  const std::vector<std::size_t> support{0, 1};
  return build_proposal(PredictionTable(std::move(g)), support, clamp).probs();
}

}  // namespace

TEST_CASE("clamped normalization") {
  const ClampPolicy floor1(ClampPolicy::Mode::Floor, 1.0);
  auto q = q_of({0, 3}, floor1);
  CHECK(q[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(q[1] == doctest::Approx(0.75).epsilon(1e-15));
  q = q_of({2, 2}, floor1);
  CHECK(q[0] == 0.5);
  q = q_of({0, 0}, ClampPolicy(ClampPolicy::Mode::Offset, 1000.0));
  CHECK(q[0] == 0.5);
  CHECK(q[1] == 0.5);
}

TEST_CASE("missing prediction for an unlabeled unit") {
  PredictionTable t(2);
  t.set(0, 1.0);
  const std::vector<std::size_t> support{0, 1};
  CHECK_CODE(build_proposal(t, support, ClampPolicy()), ErrorCode::Coverage);
  const std::vector<std::size_t> only0{0};
  CHECK(build_proposal(t, only0, ClampPolicy()).prob(0) == 1.0);
}

TEST_CASE("clamp policy parsing") {
  CHECK(ClampPolicy::parse("offset", 2.0).mode == ClampPolicy::Mode::Offset);
  CHECK_CODE(ClampPolicy::parse("ceil", 1.0), ErrorCode::Config);
  CHECK_CODE(ClampPolicy::parse("floor", 0.0), ErrorCode::Config);
  CHECK_CODE(PredictionTable(std::vector<double>{-1.0}), ErrorCode::Validation);
}

TEST_CASE("sampling") {
  SUBCASE("singleton support") {
    const std::vector<std::size_t> support{4};
    Proposal p = build_proposal(PredictionTable(std::vector<double>(5, 1.0)), support, ClampPolicy());
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
      auto [u, q] = p.sample(rng);
      CHECK(u == 4);
      CHECK(q == 1.0);
    }
  }
  SUBCASE("empirical frequency") {
    const std::vector<std::size_t> support{0, 1};
    Proposal p = build_proposal(PredictionTable(std::vector<double>{1, 3}), support, ClampPolicy());
    Rng rng(2024);
    int hits = 0;
    for (int i = 0; i < 100000; ++i) hits += p.sample(rng).first == 1;
    CHECK(std::abs(hits / 100000.0 - 0.75) < 0.01);
  }
  SUBCASE("fixed seed repeats") {
    const std::vector<std::size_t> support{0, 1, 2, 3};
    Proposal p = build_proposal(PredictionTable(std::vector<double>{1, 2, 3, 4}), support, ClampPolicy());
    Rng a(99), b(99);
    for (int i = 0; i < 1000; ++i) CHECK(p.sample(a) == p.sample(b));
  }
}

TEST_CASE("predictors") {
  auto pool = testing::sim_pool({1, 2});
  LabeledSet none(2);

  PredictionTable o = OraclePredictor().predict(*pool, none);
  CHECK(o.at(0) == 1.0);
  CHECK(o.at(1) == 2.0);

  PredictionTable n = NoisyPredictor(*pool, 1.2, 0.0, 5).predict(*pool, none);
  CHECK(n.at(0) == doctest::Approx(1.2));
  CHECK(n.at(1) == doctest::Approx(2.4));

  NoisyPredictor noisy(*pool, 1.0, 0.5, 5);
  CHECK(noisy.predict(*pool, none).values()[1] == noisy.predict(*pool, none).values()[1]);

  CHECK(UniformPredictor().predict(*pool, none).at(1) == 1.0);
  CHECK_CODE(OraclePredictor().predict(*testing::live_pool(2), none), ErrorCode::Unavailable);
}

TEST_CASE("improving predictor noise decays") {
  auto pool = testing::sim_pool({1, 2, 3});
  ImprovingPredictor p(*pool, 1.0, 1.0, 1.0, 1);
  CHECK(p.sigma_at(0) == 1.0);
  CHECK(p.sigma_at(3) == doctest::Approx(0.5));
  CHECK(p.sigma_at(10) < p.sigma_at(3));
}

TEST_CASE("checkpoint lookup by label count") {
  auto pool = testing::sim_pool({1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  std::map<std::size_t, PredictionTable> tables;
  tables.emplace(0, PredictionTable(std::vector<double>(10, 1.0)));
  tables.emplace(10, PredictionTable(std::vector<double>(10, 2.0)));
  FixedCheckpointPredictor p(std::move(tables));
  LabeledSet seven(10);
  for (std::size_t i = 0; i < 7; ++i) seven.add(i, pool->truth(i));
  CHECK(p.predict(*pool, seven).at(9) == 1.0);
}

TEST_CASE("checkpoint file parsing") {
  auto pool = testing::sim_pool({1, 2});
  std::istringstream in("0\tu0\t1.5\n0\tu1\t2.5\n3\tu0\t4\n3\tu1\t5\n");
  auto tables = parse_checkpoints(in, *pool);
  REQUIRE(tables.size() == 2);
  CHECK(tables.at(3).at(1) == 5.0);
  std::istringstream bad("0\tnope\t1\n");
  CHECK_CODE(parse_checkpoints(bad, *pool), ErrorCode::Parse);
}

TEST_CASE("oracle loss acquisition signal") {
  auto pool = testing::sim_pool({1, 5});
  auto inner = std::make_shared<const TablePredictor>(PredictionTable(std::vector<double>{1, 1}));
  PredictionTable loss = OracleLossPredictor(inner).predict(*pool, LabeledSet(2));
  CHECK(loss.at(0) == 0.0);
  CHECK(loss.at(1) == 4.0);
}
