#include <doctest.h>

#include "leelab/bounds.hpp"
#include "leelab/spectral.hpp"
#include "support.hpp"

using namespace leelab;
using testing_support::kPi;

TEST_SUITE("bounds") {
  TEST_CASE("variational value") {
    const double V = 4 * kPi * kPi;
    auto free = testing_support::model(testing_support::square_torus(), 4.5,
                                       testing_support::params(0.0, 1));
    auto v0 = variational_upper(free, enumerate_sector(free.catalog(), 1));
    CHECK(v0.matrix_element == 0.0);
    CHECK(v0.printed_closed_form == 0.0);

    auto model = testing_support::model(testing_support::square_torus(), 4.5,
                                        testing_support::params(1.0, 1));
    auto sector = enumerate_sector(model.catalog(), 1);
    auto v = variational_upper(model, sector);
    CHECK(v.printed_closed_form == doctest::Approx(-1.0 / (V * 1.5)).epsilon(1e-12));
    CHECK(v.printed_closed_form == doctest::Approx(-0.01688).epsilon(1e-3));
    CHECK(v.recomputed_closed_form == doctest::Approx(-1.0 / (2 * V * 0.5)).epsilon(1e-12));
    CHECK(v.matrix_element < 0.0);

    // brute-force expectation of the assembled operator
    for (int n : {1, 2, 3}) {
      auto mn = testing_support::model(testing_support::square_torus(), 4.5,
                                       testing_support::params(0.8, n));
      auto sn = enumerate_sector(mn.catalog(), n);
      auto phi = assemble_phi(mn, sn, mn.threshold()).matrix;
      std::vector<std::uint32_t> counts(mn.catalog().size(), 0);
      counts[0] = std::uint32_t(n);
      const auto i = Eigen::Index(sn.find(counts).value());
      auto vn = variational_upper(mn, sn);
      CHECK(vn.matrix_element == doctest::Approx(phi(i, i)).epsilon(1e-14));
      CHECK(vn.matrix_element == doctest::Approx(vn.recomputed_closed_form).epsilon(1e-12));
      CHECK(vn.matrix_element >= lowest_eigen(PrincipalOperator(mn, sn), mn.threshold()).value - 1e-10);
    }
  }

  TEST_CASE("compact lower bound") {
    const double V = 4 * kPi * kPi;
    auto free = testing_support::model(testing_support::square_torus(), 4.5,
                                       testing_support::params(0.0, 3));
    CHECK(compact_lower(free, 0.3) == doctest::Approx(2.0));
    auto model = testing_support::model(testing_support::square_torus(), 4.5,
                                        testing_support::params(0.1, 2));
    CHECK(compact_lower(model, 0.1) ==
          doctest::Approx(1.0 - 0.02 * (1.0 / (2 * V) + 0.1)).epsilon(1e-14));
    CHECK(compact_lower(model, 0.1) == doctest::Approx(0.99775).epsilon(1e-5));
    CHECK(invertibility_threshold(model, 0.1) == compact_lower(model, 0.1));

    auto shifted = testing_support::model(testing_support::square_torus(), 4.5,
                                          testing_support::params(0.1, 2, 1.0, 0.2));
    CHECK(compact_lower(shifted, 0.1) == compact_lower(model, 0.1));
  }

  TEST_CASE("relative potential norm and flow positivity below the threshold") {
    for (auto spec : {testing_support::square_torus(), ManifoldSpec::sphere(1.0)}) {
      for (int n : {1, 2}) {
        auto model = testing_support::model(spec, 6.0, testing_support::params(1.0, n));
        auto sector = enumerate_sector(model.catalog(), n);
        const double C = default_heat_kernel_constant(spec);
        const double Estar = invertibility_threshold(model, C);
        PrincipalOperator op(model, sector);
        for (double d : {0.01, 0.1, 0.5, 1.0, 2.0}) {
          CHECK(relative_potential_norm(model, sector, Estar - d) < 1.0);
          CHECK(lowest_eigen(op, Estar - d).value > 0.0);
        }
      }
    }
  }

  TEST_CASE("crude inequality") {
    auto cat = build_catalog(ManifoldSpec::sphere(1.0), 40.0, 1.0, true);
    for (double chi : {1e-6, 0.1, 1.0, 50.0}) CHECK(crude_inequality_holds(cat, chi));
  }

  TEST_CASE("bound report sandwich") {
    for (double lambda : {0.25, 1.0, 2.0}) {
      for (int n : {1, 2}) {
        auto model = testing_support::model(testing_support::square_torus(), 4.5,
                                            testing_support::params(lambda, n));
        auto sector = enumerate_sector(model.catalog(), n);
        const double C = default_heat_kernel_constant(model.catalog().spec());
        auto r = bound_report(model, sector, C);
        REQUIRE(r.e_gr.has_value());
        CHECK(r.lower_bound == compact_lower(model, C));
        CHECK(r.threshold == model.threshold());
        CHECK(r.lower_bound <= *r.e_gr);
        CHECK(*r.e_gr < r.threshold);
        CHECK(r.sandwich);
        CHECK(r.variational_negative);
        CHECK(r.variational_dominates);
        CHECK(r.variational.matrix_element >= r.omega0_at_threshold - 1e-10);
      }
    }
  }
}
