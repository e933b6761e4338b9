#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "lsngc/errors.hpp"
#include "lsngc/grbf.hpp"
#include "lsngc/rng.hpp"

using namespace lsngc;

namespace {

Matrix points_from(const std::vector<std::vector<double>>& cols) {
    Matrix m(cols.front().size(), cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c)
        for (std::size_t r = 0; r < cols[c].size(); ++r) m(r, c) = cols[c][r];
    return m;
}

StateSpace states_from(const std::vector<std::vector<double>>& cols) {
    StateSpace s;
    s.states = points_from(cols);
    s.lag = 1;
    return s;
}

// Exhaustive 2-partition oracle: optimal centers of the best split into two
// non-empty clusters by total squared distance.
std::pair<std::vector<double>, std::vector<double>> best_two_partition(const Matrix& points) {
    const std::size_t m = points.cols();
    const std::size_t dim = points.rows();
    double best_sse = std::numeric_limits<double>::infinity();
    std::pair<std::vector<double>, std::vector<double>> best;
    for (std::size_t mask = 1; mask + 1 < (1u << m); ++mask) {
        std::vector<double> mean_a(dim, 0.0), mean_b(dim, 0.0);
        std::size_t na = 0, nb = 0;
        for (std::size_t p = 0; p < m; ++p) {
            const bool in_a = mask & (1u << p);
            for (std::size_t r = 0; r < dim; ++r)
                (in_a ? mean_a[r] : mean_b[r]) += points(r, p);
            (in_a ? na : nb) += 1;
        }
        for (std::size_t r = 0; r < dim; ++r) {
            mean_a[r] /= static_cast<double>(na);
            mean_b[r] /= static_cast<double>(nb);
        }
        double sse = 0.0;
        for (std::size_t p = 0; p < m; ++p) {
            const auto& mean = (mask & (1u << p)) ? mean_a : mean_b;
            for (std::size_t r = 0; r < dim; ++r) {
                const double diff = points(r, p) - mean[r];
                sse += diff * diff;
            }
        }
        if (sse < best_sse) {
            best_sse = sse;
            best = {mean_a, mean_b};
        }
    }
    return best;
}

} // namespace

TEST_CASE("kmeans with k=1 returns the coordinate-wise mean") {
    const auto points = points_from({{1, 2}, {3, 6}, {5, 4}});
    const auto centers = kmeans(points, 1, 7);
    REQUIRE(centers.cols() == 1);
    CHECK(centers(0, 0) == doctest::Approx(3.0));
    CHECK(centers(1, 0) == doctest::Approx(4.0));
}

TEST_CASE("kmeans recovers two well-separated blobs (2-partition oracle)") {
    // Five points around (0,0) and five around (10,10).
    std::vector<std::vector<double>> cols;
    Rng rng = make_rng(13, "test/blobs");
    for (int i = 0; i < 5; ++i)
        cols.push_back({rng.next_double() - 0.5, rng.next_double() - 0.5});
    for (int i = 0; i < 5; ++i)
        cols.push_back({10.0 + rng.next_double() - 0.5, 10.0 + rng.next_double() - 0.5});
    const auto points = points_from(cols);

    const auto centers = kmeans(points, 2, 99);
    const auto [mean_a, mean_b] = best_two_partition(points);
    // Match each center column to the nearer oracle mean; they must split.
    const auto closer_to_a = [&](std::size_t col) {
        double da = 0.0, db = 0.0;
        for (std::size_t r = 0; r < 2; ++r) {
            da += (centers(r, col) - mean_a[r]) * (centers(r, col) - mean_a[r]);
            db += (centers(r, col) - mean_b[r]) * (centers(r, col) - mean_b[r]);
        }
        return da < db;
    };
    REQUIRE(closer_to_a(0) != closer_to_a(1));
    for (std::size_t col = 0; col < 2; ++col) {
        const auto& mean = closer_to_a(col) ? mean_a : mean_b;
        for (std::size_t r = 0; r < 2; ++r)
            CHECK(centers(r, col) == doctest::Approx(mean[r]).epsilon(1e-12));
    }
}

TEST_CASE("kmeans needs at least k points") {
    const auto points = points_from({{1, 1}, {2, 2}, {3, 3}});
    CHECK_THROWS_AS(kmeans(points, 4, 0), TooFewPoints);
}

TEST_CASE("kmeans is bit-deterministic in (points, k, seed)") {
    Rng rng = make_rng(3, "test/kmeans-det");
    Matrix points(4, 60);
    for (auto& v : points.data()) v = rng.next_gaussian();
    const auto a = kmeans(points, 6, 42);
    const auto b = kmeans(points, 6, 42);
    CHECK(bit_equal(a, b));
}

TEST_CASE("kernel_width") {
    SUBCASE("3-4-5 triangle") {
        const auto centers = points_from({{0, 0}, {3, 0}, {0, 4}});
        CHECK(kernel_width(centers) == doctest::Approx(4.0));
    }
    SUBCASE("single pair") {
        const auto centers = points_from({{0, 0}, {2, 0}});
        CHECK(kernel_width(centers) == doctest::Approx(2.0));
    }
    SUBCASE("one center falls back to 1.0") {
        const auto centers = points_from({{5, 5}});
        CHECK(kernel_width(centers) == 1.0);
    }
}

TEST_CASE("activations") {
    SUBCASE("single center gives all ones") {
        GrbfCodebook book{points_from({{0.0, 0.0}}), 1.0};
        const auto act = activations(states_from({{1, 1}, {2, -1}, {0, 0}}), book);
        for (std::size_t j = 0; j < act.cols(); ++j) CHECK(act(0, j) == doctest::Approx(1.0));
    }

    SUBCASE("equidistant state splits evenly") {
        GrbfCodebook book{points_from({{-1.0, 0.0}, {1.0, 0.0}}), 0.7};
        const auto act = activations(states_from({{0, 0}}), book);
        CHECK(act(0, 0) == doctest::Approx(0.5));
        CHECK(act(1, 0) == doctest::Approx(0.5));
    }

    SUBCASE("distances (0, 1) with sigma=1 give the hand-computed split") {
        GrbfCodebook book{points_from({{0.0}, {1.0}}), 1.0};
        const auto act = activations(states_from({{0.0}}), book);
        CHECK(act(0, 0) == doctest::Approx(0.731059).epsilon(1e-6));
        CHECK(act(1, 0) == doctest::Approx(0.268941).epsilon(1e-6));
    }

    SUBCASE("partition of unity holds to 1e-12 over 1000 fuzz cases") {
        Rng rng = make_rng(8, "test/activations-fuzz");
        for (int rep = 0; rep < 1000; ++rep) {
            const std::size_t dim = 1 + rng.next_below(5);
            const std::size_t c = 1 + rng.next_below(8);
            GrbfCodebook book;
            book.centers = Matrix(dim, c);
            for (auto& v : book.centers.data()) v = 10.0 * (rng.next_double() - 0.5);
            book.sigma = 0.1 + 3.0 * rng.next_double();
            StateSpace s;
            s.states = Matrix(dim, 3);
            for (auto& v : s.states.data()) v = 10.0 * (rng.next_double() - 0.5);
            const auto act = activations(s, book);
            for (std::size_t j = 0; j < act.cols(); ++j) {
                double sum = 0.0, peak = 0.0;
                for (std::size_t i = 0; i < act.rows(); ++i) {
                    sum += act(i, j);
                    peak = std::max(peak, act(i, j));
                    // far-off centers may underflow to exactly 0
                    CHECK(act(i, j) >= 0.0);
                    CHECK(act(i, j) <= 1.0);
                }
                CHECK(peak > 0.0);
                CHECK(std::fabs(sum - 1.0) <= 1e-12);
            }
        }
    }

    SUBCASE("a state sitting on center i peaks at row i") {
        Rng rng = make_rng(21, "test/activations-peak");
        GrbfCodebook book;
        book.centers = Matrix(3, 5);
        for (auto& v : book.centers.data()) v = rng.next_gaussian();
        book.sigma = 0.8;
        StateSpace s;
        s.states = Matrix(3, 1);
        for (std::size_t r = 0; r < 3; ++r) s.states(r, 0) = book.centers(r, 2);
        const auto act = activations(s, book);
        for (std::size_t i = 0; i < 5; ++i)
            if (i != 2) CHECK(act(2, 0) > act(i, 0));
    }

    SUBCASE("dimension mismatch is rejected") {
        GrbfCodebook book{points_from({{0.0, 0.0}}), 1.0};
        CHECK_THROWS_AS(activations(states_from({{1.0}}), book), DimensionMismatch);
    }
}

TEST_CASE("prune_centers removes the excluded block and recomputes sigma") {
    // N=2 series, d=2: rows 0,1 belong to series 0, rows 2,3 to series 1.
    std::vector<StateSpace::Coordinate> layout = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    Rng rng = make_rng(4, "test/prune");
    GrbfCodebook book;
    book.centers = Matrix(4, 6);
    for (auto& v : book.centers.data()) v = rng.next_gaussian();
    book.sigma = kernel_width(book.centers);

    const auto pruned = prune_centers(book, layout, 0);
    REQUIRE(pruned.dim() == 2);
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t c = 0; c < 6; ++c) CHECK(pruned.centers(r, c) == book.centers(r + 2, c));
    CHECK(pruned.sigma == doctest::Approx(kernel_width(pruned.centers)));
    CHECK(pruned.sigma != book.sigma);

    SUBCASE("d=1 removes exactly the one row") {
        std::vector<StateSpace::Coordinate> flat = {{0, 0}, {1, 0}, {2, 0}};
        GrbfCodebook small;
        small.centers = Matrix(3, 4);
        for (auto& v : small.centers.data()) v = rng.next_gaussian();
        small.sigma = 1.0;
        const auto out = prune_centers(small, flat, 1);
        REQUIRE(out.dim() == 2);
        for (std::size_t c = 0; c < 4; ++c) {
            CHECK(out.centers(0, c) == small.centers(0, c));
            CHECK(out.centers(1, c) == small.centers(2, c));
        }
    }

    SUBCASE("pruned dimension is (N-1)*d for every layout") {
        for (std::size_t n = 2; n <= 4; ++n)
            for (int d = 1; d <= 3; ++d) {
                std::vector<StateSpace::Coordinate> lay;
                for (std::size_t s = 0; s < n; ++s)
                    for (int o = 0; o < d; ++o) lay.push_back({s, o});
                GrbfCodebook b;
                b.centers = Matrix(n * static_cast<std::size_t>(d), 3);
                for (auto& v : b.centers.data()) v = rng.next_gaussian();
                b.sigma = 1.0;
                CHECK(prune_centers(b, lay, n - 1).dim() ==
                      (n - 1) * static_cast<std::size_t>(d));
            }
    }

    SUBCASE("unknown series index is rejected") {
        CHECK_THROWS_AS(prune_centers(book, layout, 9), BadIndex);
    }
}
