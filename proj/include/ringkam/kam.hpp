// kam.hpp: Iterative KAM diagonalization of a truncated Floquet matrix.
//
//     M_1 = B_1 M,   W_n,ij = M_n,ij / (M_n,ii - M_n,jj)  (i != j, non-resonant),
//     U_n = e^{W_n} U_{n-1},   M_{n+1} = e^{W_n} M_n e^{-W_n} + U_n (D_{n+1} M) U_n^*
//
// D_d M keeps the entries at l1 index distance exactly d and B_n M = sum_{d<=n} D_d M.
// Entries whose divisor falls below gamma_n <d>^{-sigma} are not removed; they stay
// in M and are reported as resonance hits.

#pragma once

#include "ringkam/floquet.hpp"

#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace ringkam {

MatrixXcd band_part(const MatrixXcd& M, const FloquetLayout& layout, int d);
MatrixXcd band_sum(const MatrixXcd& M, const FloquetLayout& layout, int n);

struct ResonanceHit {
    int i = 0;
    int j = 0;
    double divisor = 0.0;    // M_ii - M_jj
    double magnitude = 0.0;  // |M_ij|
};

// (k, n, m) reading of a hit: k = j1(i) - j1(j), n and m the band labels.
ResonanceWitness interpret(const ResonanceHit& hit, const FloquetLayout& layout);

struct GeneratorResult {
    MatrixXcd W;
    std::vector<ResonanceHit> hits;
    double divisor_floor = 0.0;   // smallest |M_ii - M_jj| over used entries
    double residual = 0.0;        // max |[W, diag M] + (unblocked off-diagonal of M)|
};

// Entries with |M_ij| <= significance are ignored. Throws AllResonant if every
// significant off-diagonal entry is blocked.
GeneratorResult generator(const MatrixXcd& M, const FloquetLayout& layout, double gamma_n,
                          double sigma, double significance = 0.0);

enum class Conjugation { LieSchwinger, Exponential };

// e^W M e^{-W} for anti-Hermitian W. The series route sums ad_W^k(M) / k! until
// the term falls below 1e-14 max(1, |M|_max); SeriesDivergence if terms grow for
// three consecutive orders.
MatrixXcd conjugate(const MatrixXcd& W, const MatrixXcd& M, Conjugation method);

struct KamState {
    int step = 1;
    MatrixXcd M;            // M_n
    MatrixXcd U;            // U_{n-1}
    int included_band = 1;
    std::vector<double> offdiag_history;  // |OM_n|_max
    std::vector<double> w_history;        // |W_n|_max
    std::vector<double> added_history;    // off-diagonal max of U_n (D_{n+1} M) U_n^*
    double divisor_floor = std::numeric_limits<double>::infinity();
    double unitarity_defect = 0.0;
    std::vector<ResonanceHit> hits;
};

KamState kam_start(const MatrixXcd& M, const FloquetLayout& layout);

struct KamSchedule {
    double gamma = 0.0;     // <= 0 selects sqrt(finite_norm(OM, 0, sigma))
    double mu = 2.0;
    double sigma = 3.0;
    int max_steps = 400;
    double tol_offdiag = 1e-8;
    double tol_unitary = 1e-8;
    double max_generator = 5.0;
    Conjugation method = Conjugation::Exponential;
};

// One recursion step with gamma_n = gamma n^{-mu}.
void kam_step(KamState& state, const MatrixXcd& full_M, const FloquetLayout& layout,
              const KamSchedule& schedule, double gamma);

struct KamReport {
    bool converged = false;
    int steps = 0;
    double gamma = 0.0;
    FloquetLayout layout;
    VectorXd diagonal;        // diagonal of M_inf in the original labels
    VectorXd eigenvalues;     // eigenvalues[i] paired with input label i by overlap matching
    std::vector<int> label_of;  // label_of[c] = input label matched to column c of U_inf^*
    MatrixXcd U;              // U_inf
    MatrixXcd eigenvectors;   // U_inf^{-1} = U_inf^*
    MatrixXcd final_matrix;   // M_inf
    std::vector<ResonanceHit> hits;
    std::vector<double> offdiag_history;
    std::vector<double> w_history;
    std::vector<double> added_history;
    double divisor_floor = 0.0;
    double unitarity_defect = 0.0;
    double final_offdiag = 0.0;
    int significant_band = 0;     // largest d with |D_d M|_max > tol_offdiag
    double contraction_K = 0.0;   // fitted on steps after the significant bands
    std::vector<std::string> warnings;
};

class KamError : public ResonanceError {
public:
    KamError(ErrorKind kind, const std::string& message, ResonanceWitness witness,
             std::shared_ptr<const KamReport> report)
        : ResonanceError(kind, message, witness), report_(std::move(report)) {}
    const KamReport& report() const noexcept { return *report_; }

private:
    std::shared_ptr<const KamReport> report_;
};

// Throws KamError(Resonant) when blocked entries above tol_offdiag remain at the
// end (including a step where every remaining entry is blocked),
// KamError(NotConverged) otherwise if the tolerance is not reached.
KamReport run(const FloquetMatrix& M, const KamSchedule& schedule);

// Minimum-cost perfect assignment (rows to columns) of a square cost matrix.
std::vector<int> min_cost_assignment(const MatrixXd& cost);

// Fitted K in |OM_{n+1}| <= K |OM_n|^2 + |U_n D_{n+1} M U_n^*| over steps at or
// beyond `from_step` whose off-diagonal norms exceed `floor`.
double fit_contraction(const KamReport& report, int from_step, double floor);

}  // namespace ringkam
