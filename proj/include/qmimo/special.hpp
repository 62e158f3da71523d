#pragma once

namespace qmimo {

double normal_pdf(double x);
double normal_cdf(double x);

// exp(x^2) * erfc(x), evaluated without overflow for x >= 0 and without
// catastrophic loss down to the x < 0 range used here.
double erfcx(double x);

// phi(x) / Phi(x), the inverse Mills ratio. Remains accurate for very
// negative x where both numerator and denominator underflow; the argument is
// capped at +-37 so downstream products stay finite and runs reproducible.
double pdf_over_cdf(double x);

// phi(x)^2 / (Phi(x) * (1 - Phi(x))): information weight of one sign
// observation. Equals 2/pi at x = 0 and decays to 0 as |x| grows.
double sign_fisher_weight(double x);

// x * pdf_over_cdf(x) + pdf_over_cdf(x)^2, the negative derivative of
// pdf_over_cdf. Lies in (0, 1); evaluated in a cancellation-safe form.
double pdf_over_cdf_slope(double x);

}  // namespace qmimo
