#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <utility>

#include "torsionlab/laplacian.hpp"

namespace tl {

// Catalan's constant from its alternating series (Cohen-Villegas-Zagier
// acceleration). A scoped override lets the self test corrupt it.
double catalan();
class CatalanOverride {
public:
    explicit CatalanOverride(double value);
    ~CatalanOverride();
    CatalanOverride(const CatalanOverride&) = delete;
    CatalanOverride& operator=(const CatalanOverride&) = delete;

private:
    std::optional<double> saved_;
};

inline double log_silver() { return std::log1p(std::sqrt(2.0)); }  // log(1 + sqrt 2)

// n^2-rescaled Neumann eigenvalue of the an x bn grid; 0 at (0, 0)
double mesh_eigenvalue(int a, int b, int n, int i, int j);
// eigenvector value at grid vertex (k, l)
double mesh_eigenvector(int a, int b, int n, int i, int j, int k, int l);
// ab n^2 / 2^{[i != 0] + [j != 0]}
double mesh_eigenvector_norm2(int a, int b, int n, int i, int j);

// closed-form n^2-rescaled spectra. Phases twist the periodic directions.
HermitianSpectrum rectangle_mesh_spectrum(int a, int b, int n);
HermitianSpectrum torus_mesh_spectrum(int a, int b, int n, double alpha = 0.0, double beta = 0.0);
HermitianSpectrum cylinder_mesh_spectrum(int a, int b, int n, double alpha = 0.0);

// prod_{j<m} (sin^2(pi j / 2m) + x^2)
double sin_product(int m, double x);
double log_sin_product(int m, double x);  // x != 0
double sin_product_printed(int m, double x);
double sin_product_direct(int m, double x);

// log det' of the graph Laplacian (not rescaled), from separable products
struct MeshLogDet {
    double logdet = 0.0;
    int kernel = 0;
    long vertices = 0;
};
MeshLogDet rectangle_mesh_logdet(int a, int b, int n);
MeshLogDet torus_mesh_logdet(int a, int b, int n, double alpha = 0.0, double beta = 0.0);
MeshLogDet cylinder_mesh_logdet(int a, int b, int n, double alpha = 0.0);

// phi(x, y) = sum a_ij cos(2 pi i x / a) cos(2 pi j y / b) on [0,a] x [0,b]
struct FourierProfile {
    int a = 1;
    int b = 1;
    std::map<std::pair<int, int>, double> coeffs;

    double operator()(double x, double y) const;
    int max_index() const;
    double coeff(int i, int j) const;
};

// tr(phi log(n^2 Laplacian)) on the kernel complement
double szego_trace_direct(const FourierProfile& p, int n);
// same trace by contracting phi against every eigenvector
double szego_trace_contraction(const FourierProfile& p, int n);

struct SzegoConstants {
    double c1 = 0.0, c2 = 0.0, c3 = 0.0, c_phi = 0.0;
};
SzegoConstants szego_constants(const FourierProfile& p);
double szego_expansion_predicted(const FourierProfile& p, int n);

}  // namespace tl
