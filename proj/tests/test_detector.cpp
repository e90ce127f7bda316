#include "otfs/detector.hpp"

#include <doctest.h>

#include <random>

using namespace otfs;

namespace {

SparseEffectiveChannel identity(std::size_t n)
{
    std::vector<SparseEffectiveChannel::Entry> e;
    for (std::size_t i = 0; i < n; ++i)
        e.push_back({i, i, {1.0, 0.0}});
    return SparseEffectiveChannel::from_triplets(n, e);
}

// Random sparse H with `per_row` entries per row, all columns covered.
SparseEffectiveChannel random_sparse(std::size_t n, int per_row, std::mt19937_64& rng)
{
    std::normal_distribution<double> nd;
    std::uniform_int_distribution<std::size_t> col(0, n - 1);
    std::vector<SparseEffectiveChannel::Entry> e;
    for (std::size_t r = 0; r < n; ++r) {
        e.push_back({r, r, Complex(nd(rng), nd(rng))});
        for (int j = 1; j < per_row; ++j)
            e.push_back({r, col(rng), Complex(nd(rng), nd(rng)) * 0.5});
    }
    return SparseEffectiveChannel::from_triplets(n, e);
}

std::vector<std::size_t> random_labels(std::size_t n, std::size_t q, std::mt19937_64& rng)
{
    std::uniform_int_distribution<std::size_t> u(0, q - 1);
    std::vector<std::size_t> l(n);
    for (auto& v : l)
        v = u(rng);
    return l;
}

std::vector<Complex> symbols_of(const std::vector<std::size_t>& labels, const Alphabet& a)
{
    std::vector<Complex> x;
    for (auto l : labels)
        x.push_back(a[l]);
    return x;
}

std::vector<Complex> noisy(std::vector<Complex> y, double var, std::mt19937_64& rng)
{
    std::normal_distribution<double> nd(0.0, std::sqrt(var / 2.0));
    for (auto& v : y)
        v += Complex(nd(rng), nd(rng));
    return y;
}

} // namespace

TEST_CASE("config validation")
{
    DetectorConfig c;
    CHECK_NOTHROW(c.check());
    c.damping = 0.0;
    CHECK_THROWS_AS(c.check(), std::invalid_argument);
    c = {};
    c.damping = 1.5;
    CHECK_THROWS_AS(c.check(), std::invalid_argument);
    c = {};
    c.max_iters = 0;
    CHECK_THROWS_AS(c.check(), std::invalid_argument);
    c = {};
    c.gamma = 1.0;
    CHECK_THROWS_AS(c.check(), std::invalid_argument);
    c = {};
    c.epsilon = -0.1;
    CHECK_THROWS_AS(c.check(), std::invalid_argument);
    CHECK(to_string(StopReason::max_iters) == "max-iters");
    CHECK(to_string(StopReason::converged) == "converged");
    CHECK(to_string(StopReason::degraded) == "degraded");
}

TEST_CASE("identity channel, noiseless: exact after one iteration")
{
    std::mt19937_64 rng(31);
    for (int q : {4, 16}) {
        const auto a = make_alphabet(q);
        const auto h = identity(64);
        const auto labels = random_labels(64, a.size(), rng);
        const auto x = symbols_of(labels, a);
        DetectorConfig cfg;
        cfg.damping = 1.0;
        const auto r = mp_detect(x, h, a, 1e-5, cfg);
        CHECK(r.labels == labels);
        CHECK(r.symbols == x);
        CHECK(r.iterations == 1);
        REQUIRE(r.eta.size() == 1);
        CHECK(r.eta[0] == 1.0);
        CHECK(r.stop == StopReason::converged);
    }
}

TEST_CASE("single BPSK symbol decides the nearest point")
{
    const Alphabet bpsk({{1.0, 0.0}, {-1.0, 0.0}});
    const auto h = identity(1);
    const std::vector<Complex> y{{0.9, 0.0}};
    const auto r = mp_detect(y, h, bpsk, 1.0);
    REQUIRE(r.symbols.size() == 1);
    CHECK(r.symbols[0] == Complex(1.0, 0.0));
    const std::vector<Complex> yn{{-0.2, 0.7}};
    CHECK(mp_detect(yn, h, bpsk, 1.0).labels[0] == 1);
}

TEST_CASE("messages stay valid distributions and variances stay above the noise")
{
    std::mt19937_64 rng(32);
    const auto a = make_alphabet(4);
    const auto h = random_sparse(32, 4, rng);
    const auto x = symbols_of(random_labels(32, 4, rng), a);
    const double nv = 0.05;
    const auto y = noisy(h.multiply(x), nv, rng);
    MessagePassingDetector det(h, a);
    det.reset(y, nv);
    for (int it = 0; it < 8; ++it) {
        const double eta = det.iterate();
        CHECK(eta >= 0.0);
        CHECK(eta <= 1.0);
        for (std::size_t e = 0; e < det.edge_count(); ++e) {
            double s = 0.0;
            for (double p : det.pmf(e)) {
                CHECK(p >= 0.0);
                s += p;
            }
            CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(det.variance(e) >= nv);
        }
        for (std::size_t c = 0; c < 32; ++c) {
            double s = 0.0;
            for (double p : det.posterior(c))
                s += p;
            CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("first observation pass sees uniform priors")
{
    // Uniform pmfs over a zero-mean alphabet: every interference mean is 0.
    const auto a = make_alphabet(4);
    std::vector<SparseEffectiveChannel::Entry> e{{0, 0, {1.0, 0.0}}, {0, 1, {0.5, 0.5}}, {1, 1, {1.0, 0.0}}};
    const auto h = SparseEffectiveChannel::from_triplets(2, e);
    MessagePassingDetector det(h, a);
    const std::vector<Complex> y{{0.3, 0.1}, {-0.2, 0.4}};
    det.reset(y, 0.1);
    det.iterate();
    for (std::size_t k = 0; k < det.edge_count(); ++k)
        CHECK(std::abs(det.mean(k)) < 1e-15);
    // Edge (0,0) sees the other edge's interference: |0.5+0.5j|^2 * E|a|^2 + noise.
    CHECK(det.variance(0) == doctest::Approx(0.5 + 0.1));
    CHECK(det.variance(2) == doctest::Approx(0.1));
}

TEST_CASE("decisions are invariant to a common scaling of y and H")
{
    std::mt19937_64 rng(33);
    const auto a = make_alphabet(16);
    const auto h = random_sparse(48, 5, rng);
    const auto x = symbols_of(random_labels(48, 16, rng), a);
    const double nv = 0.02;
    const auto y = noisy(h.multiply(x), nv, rng);
    const auto ref = mp_detect(y, h, a, nv);
    for (Complex s : {Complex(2.0, 0.0), Complex(0.0, -0.5), Complex(1.3, 0.9)}) {
        std::vector<Complex> ys(y);
        for (auto& v : ys)
            v *= s;
        const auto hs = h.scaled(s);
        const auto r = mp_detect(ys, hs, a, nv * std::norm(s));
        CHECK(r.labels == ref.labels);
        CHECK(r.iterations == ref.iterations);
    }
}

TEST_CASE("non-grid alphabets take the generic likelihood path")
{
    std::mt19937_64 rng(34);
    // 8-PSK is not a product of real and imaginary levels.
    std::vector<Complex> psk;
    for (int i = 0; i < 8; ++i)
        psk.push_back(std::polar(1.0, kPi * i / 4.0));
    const Alphabet a(psk);
    const auto h = random_sparse(24, 3, rng);
    const auto labels = random_labels(24, 8, rng);
    const auto x = symbols_of(labels, a);
    const auto r = mp_detect(h.multiply(x), h, a, 1e-4);
    CHECK(r.labels == labels);

    // The rotated 4-point set only factors as a grid in its own axes.
    const auto q4 = make_alphabet(4);
    std::vector<Complex> rot;
    for (std::size_t i = 0; i < 4; ++i)
        rot.push_back(q4[i] * std::polar(1.0, 0.3));
    const Alphabet ar(rot);
    const auto lr = random_labels(24, 4, rng);
    CHECK(mp_detect(h.multiply(symbols_of(lr, ar)), h, ar, 1e-4).labels == lr);
}

TEST_CASE("mp_detect agrees with the exhaustive oracle on small systems")
{
    std::mt19937_64 rng(35);
    const auto a = make_alphabet(4);
    const double nv = 1e-3;
    int agree = 0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        const auto h = random_sparse(4, 2, rng);
        const auto x = symbols_of(random_labels(4, 4, rng), a);
        const auto y = noisy(h.multiply(x), nv, rng);
        const auto mp = mp_detect(y, h, a, nv);
        const auto map = map_oracle(y, h.to_dense(), a, nv);
        agree += mp.symbols == map ? 1 : 0;
    }
    CHECK(agree >= trials * 95 / 100);
}

TEST_CASE("map_oracle: identity recovery, tie-break and size guard")
{
    const auto a = make_alphabet(4);
    CMatrix eye(2, 2);
    eye(0, 0) = eye(1, 1) = 1.0;
    const std::vector<Complex> x{a[2], a[1]};
    CHECK(map_oracle(x, eye, a, 1e-3) == x);

    // y = 0 is equidistant from every point.
    const std::vector<Complex> zero(2);
    const auto tie = map_oracle(zero, eye, a, 1.0);
    CHECK(tie[0] == a[0]);
    CHECK(tie[1] == a[0]);

    CMatrix big(11, 11);
    CHECK_THROWS_AS(map_oracle(std::vector<Complex>(11), big, a, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(map_oracle(std::vector<Complex>(3), eye, a, 1.0), std::invalid_argument);
}

TEST_CASE("detector error paths")
{
    const auto a = make_alphabet(4);
    const auto h = identity(4);
    const std::vector<Complex> y(4);
    CHECK_THROWS_AS(mp_detect(std::vector<Complex>(3), h, a, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(mp_detect(y, h, a, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(mp_detect(y, h, a, -1.0), std::invalid_argument);
    DetectorConfig bad;
    bad.gamma = 0.0;
    CHECK_THROWS_AS(MessagePassingDetector(h, a, bad), std::invalid_argument);
}

TEST_CASE("stopping: never more than max_iters, eta trace matches iterations")
{
    std::mt19937_64 rng(36);
    const auto a = make_alphabet(16);
    const auto h = random_sparse(64, 6, rng);
    const auto x = symbols_of(random_labels(64, 16, rng), a);
    const double nv = 0.5;
    const auto y = noisy(h.multiply(x), nv, rng);
    DetectorConfig cfg;
    cfg.max_iters = 3;
    cfg.epsilon = 1.0;
    const auto r = mp_detect(y, h, a, nv, cfg);
    CHECK(r.iterations <= 3);
    CHECK(r.eta.size() == static_cast<std::size_t>(r.iterations));
    if (r.stop != StopReason::converged)
        CHECK(r.iterations == 3);
    for (const auto& s : r.symbols)
        CHECK(a[a.nearest(s)] == s);
}
