#include <doctest.h>

#include <cmath>
#include <cstdint>

#include "biasaudit/philox.hpp"

using biasaudit::NormalStream;
using biasaudit::Philox4x32;

TEST_SUITE("philox") {
  // Known-answer vectors published with the Random123 library.
  TEST_CASE("known answer: zero counter and key") {
    const auto out = Philox4x32::block({0, 0, 0, 0}, {0, 0});
    CHECK(out == Philox4x32::Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  }

  TEST_CASE("known answer: all ones") {
    const auto out = Philox4x32::block({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                                       {0xffffffff, 0xffffffff});
    CHECK(out == Philox4x32::Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  }

  TEST_CASE("known answer: pi digits") {
    const auto out = Philox4x32::block({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                                       {0xa4093822, 0x299f31d0});
    CHECK(out == Philox4x32::Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
  }

  TEST_CASE("normal stream is reproducible and stream-separated") {
    NormalStream a(42, 0), b(42, 0), c(42, 1), d(43, 0);
    bool differs_stream = false, differs_seed = false;
    for (int i = 0; i < 64; ++i) {
      const double x = a.next();
      CHECK(x == b.next());
      differs_stream |= x != c.next();
      differs_seed |= x != d.next();
    }
    CHECK(differs_stream);
    CHECK(differs_seed);
  }

  TEST_CASE("normal stream moments") {
    NormalStream s(7, 3);
    const int n = 200000;
    double sum = 0, sq = 0;
    for (int i = 0; i < n; ++i) {
      const double x = s.next();
      CHECK_FALSE(std::isnan(x));
      sum += x;
      sq += x * x;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(std::fabs(mean) < 0.01);
    CHECK(std::fabs(var - 1.0) < 0.02);
  }
}
