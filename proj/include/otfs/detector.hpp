#pragma once

#include "otfs/effective_channel.hpp"
#include "otfs/frame.hpp"

#include <span>
#include <string>
#include <vector>

namespace otfs {

struct DetectorConfig {
    double damping = 0.7; ///< Delta in (0, 1]
    int max_iters = 30;
    double gamma = 0.1;   ///< a variable counts as converged when max_j p_c(a_j) >= 1 - gamma
    double epsilon = 0.2; ///< stop when eta falls this far below its best value

    /// Throws std::invalid_argument on out-of-range fields.
    void check() const;
};

enum class StopReason { converged, degraded, max_iters };

std::string to_string(StopReason reason);

struct DetectorResult {
    std::vector<std::size_t> labels; ///< decided alphabet labels, one per variable
    std::vector<Complex> symbols;
    int iterations = 0;
    std::vector<double> eta; ///< convergence indicator after each iteration
    StopReason stop = StopReason::max_iters;
};

/// Message passing over the factor graph of y = Hx + w. Each stored entry of H
/// is one edge; edges are numbered in H's CSR order. Pmf messages are kept in
/// a flat edges x Q array.
///
/// The detector keeps references to H and the alphabet; both must outlive it.
class MessagePassingDetector {
public:
    MessagePassingDetector(const SparseEffectiveChannel& h, const Alphabet& alphabet, DetectorConfig cfg = {});

    /// Loads a new observation and resets every pmf to uniform.
    void reset(std::span<const Complex> y, double noise_var);

    /// One round: observation pass, then variable pass with damping. Returns eta.
    double iterate();

    /// reset() followed by the full iteration schedule with stopping rules.
    DetectorResult run(std::span<const Complex> y, double noise_var);

    std::size_t edge_count() const noexcept { return h_.nnz(); }
    std::span<const double> pmf(std::size_t edge) const;
    /// Interference mean and variance seen by the edge after the last observation pass.
    Complex mean(std::size_t edge) const { return mu_[edge]; }
    double variance(std::size_t edge) const { return var_[edge]; }
    /// Full posterior p_c of variable c after the last variable pass.
    std::span<const double> posterior(std::size_t c) const;
    /// Per-variable argmax of the current posteriors; ties to the lowest label.
    std::vector<std::size_t> argmax_labels() const;

private:
    const SparseEffectiveChannel& h_;
    const Alphabet& alphabet_;
    DetectorConfig cfg_;
    std::size_t q_;
    std::vector<Complex> y_;
    double noise_var_ = 1.0;

    // Label j factors as (level_a_[j], level_b_[j]). For a product-grid
    // alphabet these are the real and imaginary level indices; otherwise
    // level_a_ is the label itself and the second factor is trivial.
    bool separable_ = false;
    std::size_t na_ = 0;
    std::size_t nb_ = 0;
    std::vector<std::size_t> level_a_;
    std::vector<std::size_t> level_b_;
    std::vector<double> re_levels_;
    std::vector<double> im_levels_;

    std::vector<double> pmf_;       // E x Q
    std::vector<double> loglik_;    // E x (na + nb), log-likelihood factors up to a per-edge constant
    std::vector<double> posterior_; // NM x Q
    std::vector<Complex> mu_;
    std::vector<double> var_;
    std::vector<double> energy_; // |a_j|^2

    void observation_pass();
    double variable_pass();
};

DetectorResult mp_detect(std::span<const Complex> y, const SparseEffectiveChannel& h, const Alphabet& alphabet,
                         double noise_var, const DetectorConfig& cfg = {});

/// Largest Q^(NM) accepted by map_oracle.
inline constexpr double kMapOracleMaxCandidates = 1048576.0;

/// Joint ML/MAP decision by exhaustive enumeration under uniform priors.
/// Candidates are visited in lexicographic label order and only a strictly
/// better metric replaces the incumbent, so ties go to the lowest labels.
std::vector<Complex> map_oracle(std::span<const Complex> y, const CMatrix& h, const Alphabet& alphabet,
                                double noise_var);

} // namespace otfs
