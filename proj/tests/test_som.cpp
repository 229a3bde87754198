#include "aqmlab/rng.hpp"
#include "aqmlab/som.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

using namespace aqmlab;

namespace {

SomMap toy_pair() {
  SomMap m(1, 2);
  m.mutable_at({0, 0}).in = {0.0, 0.0};
  m.mutable_at({0, 1}).in = {1.0, 1.0};
  return m;
}

std::string serialize(const SomMap& m) {
  std::ostringstream os;
  write_map(os, m);
  return os.str();
}

SomMap parse(const std::string& text, MapLoadOptions opts = {}) {
  std::istringstream is(text);
  return read_map(is, opts);
}

std::string neuron_lines(std::size_t rows, std::size_t cols, double out) {
  std::ostringstream os;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) os << r << ' ' << c << " 0.5 0.5 " << out << '\n';
  return os.str();
}

} // namespace

TEST_CASE("winner is the exact match") {
  Rng rng(11);
  SomMap m = SomMap::random(25, 25, rng, 0.01, 0.2);
  const SomInput x = m.at(3, 7).in;
  CHECK(m.winner(x) == GridCoord{3, 7});
}

TEST_CASE("winner ties go to the lowest row-major index") {
  SomMap m(25, 25);
  for (std::size_t r = 0; r < 25; ++r)
    for (std::size_t c = 0; c < 25; ++c) m.mutable_at({r, c}).in = {0.3, 0.3};
  CHECK(m.winner({0.9, 0.1}) == GridCoord{0, 0});
}

TEST_CASE("winner on a two-neuron toy map") {
  SomMap m = toy_pair();
  // Squared distances 0.02 and 1.62.
  CHECK(m.winner({0.1, 0.1}) == GridCoord{0, 0});
  CHECK(m.winner({0.9, 0.8}) == GridCoord{0, 1});
}

TEST_CASE("respond returns the winner's output weight") {
  SomMap m = toy_pair();
  m.mutable_at({0, 0}).out = 0.07;
  m.mutable_at({0, 1}).out = 0.3;
  CHECK(m.respond({0.1, 0.1}) == 0.07);
  m.freeze();
  CHECK(m.respond({0.1, 0.1}) == m.respond({0.1, 0.1}));
}

TEST_CASE("zero learning rates leave the map unchanged") {
  Rng rng(2);
  SomMap m = SomMap::random(25, 25, rng, 0.01, 0.2);
  const SomMap before = m;
  LearnParams lp;
  lp.eta_in = lp.eta_out = 0.0;
  for (int i = 0; i < 100; ++i) m.train_step({rng.uniform(), rng.uniform()}, 0.4, lp);
  CHECK(m == before);
}

TEST_CASE("radius zero moves only the winner") {
  Rng rng(4);
  SomMap m = SomMap::random(10, 10, rng, 0.01, 0.2);
  const SomMap before = m;
  LearnParams lp;
  lp.radius = 0.0;
  const GridCoord w = m.train_step({0.5, 0.5}, 0.3, lp);
  for (std::size_t r = 0; r < 10; ++r)
    for (std::size_t c = 0; c < 10; ++c)
      if (!(GridCoord{r, c} == w)) CHECK(m.at(r, c) == before.at(r, c));
  CHECK_FALSE(m.at(w) == before.at(w));
}

TEST_CASE("winner update is w + eta (x - w)") {
  SomMap m(1, 1);
  m.mutable_at({0, 0}).in = {0.0, 0.0};
  LearnParams lp;
  lp.eta_in = 0.5;
  lp.eta_out = 0.5;
  lp.radius = 0.0;
  m.train_step({1.0, 1.0}, 0.2, lp);
  CHECK(m.at(0, 0).in[0] == 0.5);
  CHECK(m.at(0, 0).in[1] == 0.5);
  CHECK(m.at(0, 0).out == doctest::Approx(0.001 + 0.5 * (0.2 - 0.001)));
}

TEST_CASE("neighbour update follows the Gaussian of grid distance") {
  SomMap m(1, 3);
  for (std::size_t c = 0; c < 3; ++c) m.mutable_at({0, c}).in = {0.1 * c, 0.0};
  LearnParams lp;
  lp.eta_in = 1.0;
  lp.radius = 2.0;
  m.train_step({0.0, 1.0}, 0.1, lp);
  CHECK(m.at(0, 0).in[1] == doctest::Approx(1.0));
  CHECK(m.at(0, 1).in[1] == doctest::Approx(std::exp(-1.0 / 8.0)));
  CHECK(m.at(0, 2).in[1] == doctest::Approx(std::exp(-4.0 / 8.0)));
}

TEST_CASE("neighborhood function") {
  CHECK(neighborhood(0.0, 0.0) == 1.0);
  CHECK(neighborhood(1.0, 0.0) == 0.0);
  CHECK(neighborhood(3.0, 2.0) == 0.0);
  CHECK(neighborhood(2.0, 2.0) == doctest::Approx(std::exp(-0.5)));
  for (double r : {1.0, 2.5, 6.0})
    for (double d = 0.0; d + 1.0 <= r; d += 1.0) CHECK(neighborhood(d, r) >= neighborhood(d + 1.0, r));
}

TEST_CASE("training converges to a constant mapping") {
  Rng rng(8);
  SomMap m = SomMap::random(25, 25, rng, 0.01, 0.2);
  LearnParams lp;
  const SomInput x{0.4, 0.7};
  for (int i = 0; i < 3000; ++i) {
    m.train_step(x, 0.25, lp);
    lp = lp.decayed();
  }
  CHECK(m.respond(x) == doctest::Approx(0.25).epsilon(1e-3));
}

TEST_CASE("learning schedule decays to its floors") {
  LearnParams lp;
  for (int i = 0; i < 20000; ++i) lp = lp.decayed();
  CHECK(lp.eta_in == 0.01);
  CHECK(lp.eta_out == 0.01);
  CHECK(lp.radius == 1.0);
  LearnParams z;
  z.eta_in = z.eta_out = 0.0;
  z = z.decayed();
  CHECK(z.eta_in == 0.0);
  CHECK(z.eta_out == 0.0);
}

TEST_CASE("learn params validation") {
  LearnParams lp;
  CHECK_NOTHROW(lp.validate());
  lp.decay = 0.0;
  CHECK_THROWS_AS(lp.validate(), std::invalid_argument);
  lp = {};
  lp.radius = -1.0;
  CHECK_THROWS_AS(lp.validate(), std::invalid_argument);
}

TEST_CASE("output weights are clamped to the map range") {
  SomMap m(1, 1);
  LearnParams lp;
  lp.eta_out = 1.0;
  m.train_step({0.0, 0.0}, 1.5, lp);
  CHECK(m.at(0, 0).out == 0.5);
  m.train_step({0.0, 0.0}, -1.0, lp);
  CHECK(m.at(0, 0).out == 0.001);
}

TEST_CASE("frozen maps reject training and weight access") {
  SomMap m(2, 2);
  m.freeze();
  CHECK_THROWS_AS(m.train_step({0.1, 0.1}, 0.1, LearnParams{}), FrozenMapError);
  CHECK_THROWS_AS(m.mutable_at({0, 0}), FrozenMapError);
}

TEST_CASE("KSOM round trip") {
  Rng rng(1);
  const SomMap m = SomMap::random(25, 25, rng, 0.01, 0.2);
  const SomMap back = parse(serialize(m));
  CHECK(back == m);
  CHECK(back.checksum() == m.checksum());
  CHECK(back.frozen());
  CHECK(serialize(back) == serialize(m));
}

TEST_CASE("KSOM header format") {
  const SomMap m(2, 3);
  const std::string text = serialize(m);
  CHECK(text.rfind("KSOM 1 2 3 2 1\n0 0 ", 0) == 0);
  CHECK(text.find('\r') == std::string::npos);
}

TEST_CASE("KSOM load errors carry line numbers") {
  SUBCASE("dimension mismatch") {
    const std::string text = "KSOM 1 24 25 2 1\n" + neuron_lines(24, 25, 0.1);
    CHECK_THROWS_WITH_AS(parse(text), doctest::Contains("line 1: dimension mismatch"), MapFormatError);
  }
  SUBCASE("output weight out of range") {
    std::string text = "KSOM 1 25 25 2 1\n" + neuron_lines(25, 25, 0.1);
    const auto pos = text.find("0 1 0.5 0.5 0.1");
    text.replace(pos, 15, "0 1 0.5 0.5 1.5");
    CHECK_THROWS_WITH_AS(parse(text), doctest::Contains("line 3: output weight 1.5 out of range"),
                         MapFormatError);
  }
  SUBCASE("input weight out of range") {
    std::string text = "KSOM 1 1 1 2 1\n0 0 -0.1 0.5 0.1\n";
    CHECK_THROWS_WITH_AS(parse(text, {1, 1}), doctest::Contains("line 2: input weight"), MapFormatError);
  }
  SUBCASE("bad header") {
    CHECK_THROWS_AS(parse("SOM 1 25 25 2 1\n"), MapFormatError);
    CHECK_THROWS_AS(parse(""), MapFormatError);
    CHECK_THROWS_AS(parse("KSOM 2 1 1 2 1\n0 0 0 0 0\n", {1, 1}), MapFormatError);
    CHECK_THROWS_AS(parse("KSOM 1 1 1 3 1\n0 0 0 0 0\n", {1, 1}), MapFormatError);
  }
  SUBCASE("truncated, reordered, malformed, trailing") {
    CHECK_THROWS_WITH_AS(parse("KSOM 1 1 2 2 1\n0 0 0.5 0.5 0.1\n", {1, 2}),
                         doctest::Contains("line 3: unexpected end"), MapFormatError);
    CHECK_THROWS_WITH_AS(parse("KSOM 1 1 2 2 1\n0 1 0.5 0.5 0.1\n0 0 0.5 0.5 0.1\n", {1, 2}),
                         doctest::Contains("row-major"), MapFormatError);
    CHECK_THROWS_WITH_AS(parse("KSOM 1 1 1 2 1\n0 0 0.5 x 0.1\n", {1, 1}),
                         doctest::Contains("bad weight"), MapFormatError);
    CHECK_THROWS_WITH_AS(parse("KSOM 1 1 1 2 1\n0 0 0.5 0.5 0.1\nextra\n", {1, 1}),
                         doctest::Contains("line 3: trailing"), MapFormatError);
  }
}

TEST_CASE("KSOM load options") {
  const std::string text = "KSOM 1 1 1 2 1\n0 0 0.5 0.5 0.1\n";
  MapLoadOptions o{1, 1};
  o.freeze = false;
  SomMap m = parse(text, o);
  CHECK_FALSE(m.frozen());
  o.range = {0.2, 0.5};
  CHECK_THROWS_AS(parse(text, o), MapFormatError);
}

TEST_CASE("map construction validates its arguments") {
  CHECK_THROWS_AS(SomMap(0, 5), std::invalid_argument);
  CHECK_THROWS_AS(SomMap(2, 2, OutputRange{0.5, 0.1}), std::invalid_argument);
}
