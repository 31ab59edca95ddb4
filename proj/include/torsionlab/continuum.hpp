#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "torsionlab/surface.hpp"

namespace tl {

// Explicitly solvable flat surfaces. Rectangle and cylinder carry Neumann
// conditions; the cylinder has circumference a and height b.
enum class ContinuumKind { Rectangle, Torus, Cylinder };

std::string continuum_kind_name(ContinuumKind k);

std::vector<double> continuum_spectrum(ContinuumKind kind, double a, double b, double cutoff);

// 1D factors of the heat trace, each switching to its Poisson dual for small t
double theta_neumann(double length, double t);
double theta_periodic(double length, double t);

double heat_trace(ContinuumKind kind, double a, double b, double t);

struct HeatExpansion {
    double area = 0.0;
    double perimeter = 0.0;
    double constant = 0.0;
    double evaluate(double t) const;
};
HeatExpansion heat_expansion(ContinuumKind kind, double a, double b);
// heat expansion from angle data alone, in quarter turns
HeatExpansion heat_expansion(const GeometrySummary& gs);

struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Rational() = default;
    Rational(std::int64_t n, std::int64_t d = 1);
    double value() const { return double(num) / double(den); }
    std::string str() const;
    friend Rational operator+(Rational x, Rational y);
    friend Rational operator-(Rational x, Rational y);
    friend Rational operator*(Rational x, Rational y);
    friend bool operator==(Rational x, Rational y) { return x.num == y.num && x.den == y.den; }
};

Rational zeta_zero(const GeometrySummary& gs, int rank, int dim_h0);

// zeta(0) of the Neumann unit-square spectrum by a Mellin split of the heat trace
double zeta_zero_mellin(ContinuumKind kind, double a, double b);

// q^{1/24} prod (1 - q^k)
double dedekind_eta(double q);

double torus_torsion(double a, double b);
double rectangle_torsion(double a, double b);
double cylinder_torsion(double a, double b);
// U(1) twist alpha around the a-period, beta around the b-period; needs a nontrivial twist
double twisted_torus_torsion(double a, double b, double alpha, double beta);

double rescale_torsion(double logdet, double zeta0, double c);

}  // namespace tl
