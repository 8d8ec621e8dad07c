#pragma once

#include <functional>
#include <vector>

#include "loggas/potential.hpp"

namespace loggas {

/// Quadrature oracle for exact finite-N expectations at N <= 3.
///
/// Integrates over the ordered simplex lo <= l_1 < ... < l_N <= hi with the
/// unnormalized density prod (l_j - l_i)^beta * exp(-(beta N/2) sum V(l_k)).
/// (The N! symmetry factor cancels in every expectation ratio.)  The box
/// [lo, hi] truncates where the weight has decayed by e^{-80} relative to
/// the potential minimum.  Each coordinate is mapped to [0,1] and integrated
/// over panels graded toward the coincidence corner, {0, 1/64, ..., 1/2, 1},
/// with a tensorized Gauss-Legendre rule per panel.
class Oracle {
  public:
    Oracle(double beta, int N, const Potential& potential);

    /// E[g] with g evaluated on the ordered coordinate vector (l_1 < ...).
    /// Computed on the default grid (12 nodes per panel) and the refined grid
    /// (24); throws QuadratureError if the two disagree by more than 1e-6
    /// relative.
    double expectation(const std::function<double(const std::vector<double>&)>& g) const;

    /// Several expectations in one pass over the weight grid (the weight
    /// evaluation dominates the cost).  Same refinement guarantee per entry.
    std::vector<double> expectations(
        const std::vector<std::function<double(const std::vector<double>&)>>& gs) const;

    /// Largest relative grid disagreement over the last expectation call.
    double last_refinement_error() const { return last_error_; }

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    int n() const { return n_; }

  private:
    double beta_;
    int n_;
    Potential potential_;
    double lo_, hi_, vmin_;
    mutable double last_error_ = 0.0;

    /// (integrals of g_i*w, integral of w) with the given per-panel node count.
    std::pair<std::vector<double>, double> integrate(
        const std::vector<std::function<double(const std::vector<double>&)>>& gs,
        int nodes_per_panel) const;
};

/// One-shot E[g] for the (beta, N, V) ensemble; N must be 1, 2, or 3.
double exact_expectation(const std::function<double(const std::vector<double>&)>& g, double beta,
                         int N, const Potential& potential);

}  // namespace loggas
