// fock_displacement.hpp — truncated Fock space, displacement-operator matrix
// elements, Franck-Condon overlaps of displaced Fock states, and multi-mode
// Franck-Condon factors. Displacements are real throughout.

#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "synchrotherm/errors.hpp"

namespace synchrotherm::fock {

struct FockTruncation {
    int n_max = 1;              // highest retained Fock level
    double leakage_tol = 1e-6;  // per-column mass deficiency bound

    void validate() const;
};

// Default truncation for displacements up to |alpha|: displaced Fock states
// concentrate their occupation within O(alpha^2) of the origin.
FockTruncation default_truncation(double max_abs_alpha);

// Matrix of displaced-Fock overlaps entries(m, n) = <m|D(alpha)|n> with
// D(alpha) = exp[alpha (adag - a)], on the truncated space 0..n_max.
// leakage(n) = 1 - sum_m entries(m, n)^2 records the per-column mass lost to
// truncation; only certified columns may feed the rate engine.
class FranckCondonTable {
public:
    FranckCondonTable(double alpha, Eigen::MatrixXd entries, Eigen::VectorXd leakage,
                      double leakage_tol);

    double alpha() const { return alpha_; }
    int n_max() const { return static_cast<int>(entries_.rows()) - 1; }
    const Eigen::MatrixXd& entries() const { return entries_; }
    const Eigen::VectorXd& leakage() const { return leakage_; }
    double leakage_tol() const { return leakage_tol_; }

    double value(int m, int n) const { return entries_(m, n); }
    bool column_certified(int n) const { return leakage_(n) <= leakage_tol_; }

private:
    double alpha_;
    Eigen::MatrixXd entries_;
    Eigen::VectorXd leakage_;
    double leakage_tol_;
};

// Closed-form associated-Laguerre evaluation of <m|D(alpha)|n> with a
// numerically stable recurrence (no factorial overflow up to n_max = 200).
FranckCondonTable displacement_matrix(double alpha, const FockTruncation& trunc);

// Franck-Condon factor <n_p|m_q> = <n|D(alpha_p - alpha_q)|m> where
// |n_p> := Ddag(alpha_p)|n>. Throws TruncationError naming the required n_max
// when the requested levels exceed the certified truncation.
double franck_condon(int n, double alpha_p, int m, double alpha_q,
                     const FockTruncation& trunc);

// Product of per-mode squared overlaps prod_i |<n_i|D(dalpha_i)|m_i>|^2,
// accumulated in log space to avoid underflow at large mode counts.
double multi_fc_factor(std::span<const int> n_vec, std::span<const int> m_vec,
                       std::span<const double> dalpha_vec, const FockTruncation& trunc);

struct MaxFcElement {
    double value = 0.0;  // max squared magnitude over the certified block
    int m = 0;
    int n = 0;
};

// Maximum of |<m|D(dalpha)|n>|^2 over the certified block, lowest (m, n) on ties.
MaxFcElement max_fc_element(double dalpha, const FockTruncation& trunc);

// Smallest n_max whose table certifies columns up to `level` for this
// displacement, or -1 if none below the search cap.
int required_n_max(double dalpha, int level, double leakage_tol);

// Table whose certified block is guaranteed to cover columns 0..max_level,
// growing the internal truncation as needed. Throws TruncationError when the
// displacement cannot be certified within the desk-scale search cap.
FranckCondonTable certified_displacement_table(double dalpha, int max_level,
                                               double leakage_tol);

}  // namespace synchrotherm::fock
