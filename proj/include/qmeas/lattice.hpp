#pragma once

// Finite spin-1/2 chains with nearest-neighbour interactions: box Hamiltonians, the locality error
// of box-truncated Heisenberg dynamics, and box energy fluctuations.
//
// Site 0 is the leftmost tensor factor. The full finite chain stands in for infinite volume.

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "qmeas/qcore.hpp"

namespace qmeas {

inline constexpr int kMaxChainLength = 12;

struct ChainSpec {
  int length = 0;
  std::vector<Eigen::MatrixXcd> onsite;  // h_x, 2x2, one per site
  std::vector<Eigen::MatrixXcd> bonds;   // Phi(x, x+1), 4x4, one per bond
  double j_bound = 1.0;                  // ||Phi|| <= J

  void validate() const;
};

/// Random chain: on-site terms of norm <= 1, bonds rescaled to norm exactly J.
ChainSpec random_chain(int length, double j_bound, std::uint64_t seed);

/// Contiguous block of sites [first, last].
struct SiteInterval {
  int first = 0;
  int last = 0;
  int size() const { return last - first + 1; }
};

/// op acting on `k` consecutive sites starting at `first`, identity elsewhere.
Eigen::MatrixXcd embed(int length, int first, const Eigen::MatrixXcd& op);

/// sum_{x in box} h_x + sum_{x, x+1 in box} Phi(x, x+1) on the full chain.
Eigen::MatrixXcd box_hamiltonian(const ChainSpec& c, SiteInterval box);
/// Phi(x, x+1) on the full chain.
Eigen::MatrixXcd bond_term(const ChainSpec& c, int x);

/// e^{iHt} A e^{-iHt}.
Eigen::MatrixXcd heisenberg(const SpectralDecomposition& h, const Eigen::MatrixXcd& a, double t);

/// ||alpha_t(A) - alpha_t^box(A)|| for A on site 0 (2x2).
double locality_error(const ChainSpec& c, const Eigen::MatrixXcd& a_site0, double t, SiteInterval box);

/// locality_error for boxes [0, r], r = 0 .. L-1, reusing the full-chain diagonalization.
std::vector<double> locality_sweep(const ChainSpec& c, const Eigen::MatrixXcd& a_site0, double t);

/// Product state from one 2-vector per site.
Eigen::VectorXcd product_state(const std::vector<Eigen::VectorXcd>& sites);

/// Energy fluctuation of the box Hamiltonian in a product state.
double box_energy_fluctuation(const ChainSpec& c, SiteInterval box, const std::vector<Eigen::VectorXcd>& sites);

struct RasteginResult {
  int trials = 0;
  double min_slack = 0.0;  // min of arccos F(r0,s) + arccos F(r1,s) - arccos F(r0,r1)
  int failures = 0;        // slack < -1e-9
  bool passed() const { return failures == 0; }
};

/// Triangle inequality of the Bures angle on random density-matrix triples.
RasteginResult rastegin_check(int trials, int d, std::uint64_t seed);

}  // namespace qmeas
