#include "otfs/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace otfs {

void DetectorConfig::check() const
{
    if (!(damping > 0.0 && damping <= 1.0))
        throw std::invalid_argument("damping must be in (0, 1]");
    if (max_iters < 1)
        throw std::invalid_argument("max_iters must be >= 1");
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument("gamma must be in (0, 1)");
    if (!(epsilon >= 0.0))
        throw std::invalid_argument("epsilon must be >= 0");
}

std::string to_string(StopReason reason)
{
    switch (reason) {
    case StopReason::converged:
        return "converged";
    case StopReason::degraded:
        return "degraded";
    case StopReason::max_iters:
        return "max-iters";
    }
    return "unknown";
}

namespace {

// Index of v in levels (within 1e-12), appending it if new.
std::size_t level_index(std::vector<double>& levels, double v)
{
    for (std::size_t i = 0; i < levels.size(); ++i)
        if (std::abs(levels[i] - v) <= 1e-12)
            return i;
    levels.push_back(v);
    return levels.size() - 1;
}

// Normalized exp(in - max) into out; the maximum maps to exactly 1 before scaling.
inline void softmax(const double* in, double* out, std::size_t n)
{
    double top = in[0];
    for (std::size_t i = 1; i < n; ++i)
        top = std::max(top, in[i]);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = in[i] == top ? 1.0 : std::exp(in[i] - top);
        sum += out[i];
    }
    const double inv = 1.0 / sum;
    for (std::size_t i = 0; i < n; ++i)
        out[i] *= inv;
}

} // namespace

MessagePassingDetector::MessagePassingDetector(const SparseEffectiveChannel& h, const Alphabet& alphabet,
                                               DetectorConfig cfg)
    : h_(h), alphabet_(alphabet), cfg_(cfg), q_(alphabet.size())
{
    cfg_.check();

    // Square QAM is a product of a real and an imaginary level set, so the
    // Gaussian log-likelihood splits into two independent terms.
    for (std::size_t j = 0; j < q_; ++j) {
        level_a_.push_back(level_index(re_levels_, alphabet_[j].real()));
        level_b_.push_back(level_index(im_levels_, alphabet_[j].imag()));
    }
    separable_ = re_levels_.size() * im_levels_.size() == q_;
    if (!separable_) {
        for (std::size_t j = 0; j < q_; ++j) {
            level_a_[j] = j;
            level_b_[j] = 0;
        }
    }
    na_ = separable_ ? re_levels_.size() : q_;
    nb_ = separable_ ? im_levels_.size() : 1;

    const std::size_t e = h_.nnz();
    pmf_.resize(e * q_);
    loglik_.resize(e * (na_ + nb_));
    posterior_.resize(h_.dim() * q_);
    mu_.resize(e);
    var_.resize(e);
    for (std::size_t j = 0; j < q_; ++j)
        energy_.push_back(std::norm(alphabet_[j]));
}

void MessagePassingDetector::reset(std::span<const Complex> y, double noise_var)
{
    if (y.size() != h_.dim())
        throw std::invalid_argument("detector: observation length does not match H");
    if (!(noise_var > 0.0) || !std::isfinite(noise_var))
        throw std::invalid_argument("detector: noise variance must be positive");
    y_.assign(y.begin(), y.end());
    noise_var_ = noise_var;
    std::fill(pmf_.begin(), pmf_.end(), 1.0 / static_cast<double>(q_));
    std::fill(posterior_.begin(), posterior_.end(), 1.0 / static_cast<double>(q_));
}

void MessagePassingDetector::observation_pass()
{
    const auto values = h_.values();
    const auto points = alphabet_.points();
    const std::size_t q = q_;
    const std::size_t k = na_ + nb_;
    std::vector<Complex> m_e;
    std::vector<double> v_e;

    for (std::size_t d = 0; d < h_.dim(); ++d) {
        const std::size_t first = h_.row_offset(d);
        const std::size_t last = first + h_.row_cols(d).size();
        m_e.resize(last - first);
        v_e.resize(last - first);
        Complex total_mean{};
        double total_var = 0.0;
        for (std::size_t e = first; e < last; ++e) {
            const double* p = &pmf_[e * q];
            Complex mean_a{};
            double power_a = 0.0;
            for (std::size_t j = 0; j < q; ++j) {
                mean_a += p[j] * points[j];
                power_a += p[j] * energy_[j];
            }
            const Complex hm = values[e] * mean_a;
            const double hv = std::norm(values[e]) * std::max(power_a - std::norm(mean_a), 0.0);
            m_e[e - first] = hm;
            v_e[e - first] = hv;
            total_mean += hm;
            total_var += hv;
        }
        for (std::size_t e = first; e < last; ++e) {
            const Complex mu = total_mean - m_e[e - first];
            const double var = std::max(total_var - v_e[e - first], 0.0) + noise_var_;
            mu_[e] = mu;
            var_[e] = var;
            const Complex r = y_[d] - mu;
            const double inv = 1.0 / var;
            double* ll = &loglik_[e * k];
            if (separable_) {
                // -|r - h a|^2 / var up to a constant: the real and imaginary
                // parts of a contribute separately.
                const Complex w = std::conj(values[e]) * r;
                const double hh = std::norm(values[e]);
                for (std::size_t u = 0; u < na_; ++u) {
                    const double a = re_levels_[u];
                    ll[u] = (2.0 * a * w.real() - hh * a * a) * inv;
                }
                for (std::size_t v = 0; v < nb_; ++v) {
                    const double b = im_levels_[v];
                    ll[na_ + v] = (2.0 * b * w.imag() - hh * b * b) * inv;
                }
            } else {
                for (std::size_t j = 0; j < q; ++j)
                    ll[j] = -std::norm(r - values[e] * points[j]) * inv;
                ll[q] = 0.0;
            }
        }
    }
}

double MessagePassingDetector::variable_pass()
{
    const std::size_t q = q_;
    const std::size_t k = na_ + nb_;
    const double delta = cfg_.damping;
    std::vector<double> total(k);
    std::vector<double> ext(k);
    std::vector<double> prob(k);
    std::size_t converged = 0;

    for (std::size_t c = 0; c < h_.dim(); ++c) {
        const auto edges = h_.col_entries(c);
        std::fill(total.begin(), total.end(), 0.0);
        for (std::size_t e : edges) {
            const double* ll = &loglik_[e * k];
            for (std::size_t i = 0; i < k; ++i)
                total[i] += ll[i];
        }

        softmax(total.data(), prob.data(), na_);
        softmax(total.data() + na_, prob.data() + na_, nb_);
        double* post = &posterior_[c * q];
        double best = 0.0;
        for (std::size_t j = 0; j < q; ++j) {
            post[j] = prob[level_a_[j]] * prob[na_ + level_b_[j]];
            best = std::max(best, post[j]);
        }
        if (best >= 1.0 - cfg_.gamma)
            ++converged;

        // Extrinsic message: every observation of c except the edge's own.
        for (std::size_t e : edges) {
            const double* ll = &loglik_[e * k];
            for (std::size_t i = 0; i < k; ++i)
                ext[i] = total[i] - ll[i];
            softmax(ext.data(), prob.data(), na_);
            softmax(ext.data() + na_, prob.data() + na_, nb_);
            double* p = &pmf_[e * q];
            for (std::size_t j = 0; j < q; ++j)
                p[j] = delta * (prob[level_a_[j]] * prob[na_ + level_b_[j]]) + (1.0 - delta) * p[j];
        }
    }
    return static_cast<double>(converged) / static_cast<double>(h_.dim());
}

double MessagePassingDetector::iterate()
{
    if (y_.size() != h_.dim())
        throw std::logic_error("detector: iterate() called before reset()");
    observation_pass();
    return variable_pass();
}

std::span<const double> MessagePassingDetector::pmf(std::size_t edge) const
{
    return std::span<const double>(pmf_).subspan(edge * q_, q_);
}

std::span<const double> MessagePassingDetector::posterior(std::size_t c) const
{
    return std::span<const double>(posterior_).subspan(c * q_, q_);
}

std::vector<std::size_t> MessagePassingDetector::argmax_labels() const
{
    std::vector<std::size_t> labels(h_.dim());
    for (std::size_t c = 0; c < labels.size(); ++c) {
        const auto p = posterior(c);
        labels[c] = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    }
    return labels;
}

DetectorResult MessagePassingDetector::run(std::span<const Complex> y, double noise_var)
{
    reset(y, noise_var);
    DetectorResult result;
    double best_eta = 0.0;
    for (int i = 1; i <= cfg_.max_iters; ++i) {
        const double eta = iterate();
        result.eta.push_back(eta);
        result.iterations = i;
        if (i == 1 || eta > result.eta[result.eta.size() - 2])
            result.labels = argmax_labels();
        if (eta >= 1.0) {
            result.stop = StopReason::converged;
            break;
        }
        if (i > 1 && eta < best_eta - cfg_.epsilon) {
            result.stop = StopReason::degraded;
            break;
        }
        best_eta = std::max(best_eta, eta);
    }
    result.symbols.reserve(result.labels.size());
    for (std::size_t label : result.labels)
        result.symbols.push_back(alphabet_[label]);
    return result;
}

DetectorResult mp_detect(std::span<const Complex> y, const SparseEffectiveChannel& h, const Alphabet& alphabet,
                         double noise_var, const DetectorConfig& cfg)
{
    MessagePassingDetector det(h, alphabet, cfg);
    return det.run(y, noise_var);
}

std::vector<Complex> map_oracle(std::span<const Complex> y, const CMatrix& h, const Alphabet& alphabet,
                                double noise_var)
{
    const std::size_t n = h.cols();
    if (h.rows() != y.size())
        throw std::invalid_argument("map_oracle: observation length does not match H");
    if (!(noise_var > 0.0))
        throw std::invalid_argument("map_oracle: noise variance must be positive");
    const std::size_t q = alphabet.size();
    if (static_cast<double>(n) * std::log2(static_cast<double>(q)) > std::log2(kMapOracleMaxCandidates))
        throw std::invalid_argument("map_oracle: Q^n exceeds the enumeration limit");

    std::vector<std::size_t> labels(n, 0);
    std::vector<std::size_t> best_labels(n, 0);
    std::vector<Complex> x(n, alphabet[0]);
    double best = std::numeric_limits<double>::infinity();
    while (true) {
        double metric = 0.0;
        for (std::size_t r = 0; r < h.rows(); ++r) {
            Complex acc = y[r];
            for (std::size_t c = 0; c < n; ++c)
                acc -= h(r, c) * x[c];
            metric += std::norm(acc);
        }
        if (metric < best) {
            best = metric;
            best_labels = labels;
        }
        // Advance the last position fastest so candidates appear in lexicographic order.
        std::size_t pos = n;
        while (pos > 0) {
            --pos;
            if (++labels[pos] < q) {
                x[pos] = alphabet[labels[pos]];
                break;
            }
            labels[pos] = 0;
            x[pos] = alphabet[0];
            if (pos == 0) {
                pos = n + 1;
                break;
            }
        }
        if (pos == n + 1 || n == 0)
            break;
    }

    std::vector<Complex> out;
    out.reserve(n);
    for (std::size_t label : best_labels)
        out.push_back(alphabet[label]);
    return out;
}

} // namespace otfs
