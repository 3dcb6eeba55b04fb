#include "volterra/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "stepping.hpp"

namespace volterra {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kContourFloorScale = 1e-8;  // |h| below this (times 1+|z|) counts as "on a root"
constexpr double kMinCellSize = 1e-6;
constexpr int kMaxNudges = 8;

struct RootNearContour : std::runtime_error {
    RootNearContour() : std::runtime_error("spectral: root too close to the contour") {}
};

using Complex = std::complex<double>;

Complex density_transform(const SignedMeasure& m, Complex lambda, bool derivative) {
    // integral of e^{-lambda a} d(a) da (or a e^{-lambda a} d(a) for the derivative)
    if (!m.has_density()) return {0.0, 0.0};
    if (!m.exp_density.empty()) {
        const double tau = m.support_bound
                               ? *m.support_bound
                               : std::numeric_limits<double>::infinity();
        Complex total{0.0, 0.0};
        for (const auto& term : m.exp_density) {
            const Complex mu = lambda + term.rate;
            if (std::isinf(tau)) {
                total += derivative ? term.coefficient / (mu * mu) : term.coefficient / mu;
                continue;
            }
            if (std::abs(mu) * tau < 1e-4) {
                // series around mu = 0
                const Complex mt = mu * tau;
                if (derivative) {
                    total += term.coefficient * tau * tau * (0.5 - mt / 3.0 + mt * mt / 8.0);
                } else {
                    total += term.coefficient * tau * (1.0 - mt / 2.0 + mt * mt / 6.0);
                }
            } else if (derivative) {
                total += term.coefficient * (1.0 - std::exp(-mu * tau) * (1.0 + mu * tau)) /
                         (mu * mu);
            } else {
                total += term.coefficient * (1.0 - std::exp(-mu * tau)) / mu;
            }
        }
        return total;
    }
    const GridFunction& d = *m.density;
    const double h = d.step();
    Complex acc{0.0, 0.0};
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double a = d.time_at(i);
        const double w = (i == 0 || i + 1 == d.size()) ? 0.5 : 1.0;
        const Complex e = std::exp(-lambda * a);
        acc += w * d[i] * (derivative ? a * e : e);
    }
    return acc * h;
}

double contour_floor(Complex z) { return kContourFloorScale * (1.0 + std::abs(z)); }

// Accumulated argument change of h along the segment [za, zb], refining until
// each sub-step turns the phase by less than pi/2.
double edge_phase_change(const SignedMeasure& m, Complex za, Complex zb, Complex ha, Complex hb,
                         int depth) {
    if (std::abs(ha) < contour_floor(za) || std::abs(hb) < contour_floor(zb)) {
        throw RootNearContour();
    }
    const double delta = std::arg(hb / ha);
    if (std::abs(delta) <= 0.5 * kPi && depth > 0) return delta;
    if (depth >= 48) throw RootNearContour();
    const Complex zm = 0.5 * (za + zb);
    const Complex hm = char_eval(m, zm);
    return edge_phase_change(m, za, zm, ha, hm, depth + 1) +
           edge_phase_change(m, zm, zb, hm, hb, depth + 1);
}

int winding_number_impl(const SignedMeasure& m, const Rectangle& r) {
    const Complex c0{r.re_min, r.im_min}, c1{r.re_max, r.im_min};
    const Complex c2{r.re_max, r.im_max}, c3{r.re_min, r.im_max};
    const Complex corners[5] = {c0, c1, c2, c3, c0};
    // The terms e^{-lambda a} rotate at rate up to extent() per unit arc
    // length; seeding beyond that Nyquist bound keeps the phase tracker from
    // losing whole turns on long edges.
    const double rot_rate = m.extent();
    double total = 0.0;
    for (int e = 0; e < 4; ++e) {
        const double len = std::abs(corners[e + 1] - corners[e]);
        const int seed = 8 + static_cast<int>(std::ceil(len * rot_rate));
        Complex prev = corners[e];
        Complex hprev = char_eval(m, prev);
        for (int s = 1; s <= seed; ++s) {
            const Complex z = corners[e] + (corners[e + 1] - corners[e]) *
                                               (static_cast<double>(s) / seed);
            const Complex hz = char_eval(m, z);
            total += edge_phase_change(m, prev, z, hprev, hz, 0);
            prev = z;
            hprev = hz;
        }
    }
    const double w = total / (2.0 * kPi);
    const auto rounded = static_cast<int>(std::lround(w));
    if (std::abs(w - rounded) > 0.25) throw RootNearContour();
    return rounded;
}

struct Subdivider {
    const SignedMeasure& m;
    std::vector<Root> roots;
    bool clean = true;
    std::string note;

    void gather(const Rectangle& cell, int count) {
        if (count == 0) return;
        const double size = std::max(cell.width(), cell.height());
        if (count == 1) {
            if (polish_simple(cell)) return;
            if (size <= kMinCellSize) {
                roots.push_back({{0.5 * (cell.re_min + cell.re_max),
                                  0.5 * (cell.im_min + cell.im_max)},
                                 1});
                clean = false;
                note = "Newton polish failed in a minimal cell";
                return;
            }
        } else if (size <= kMinCellSize) {
            roots.push_back({{0.5 * (cell.re_min + cell.re_max),
                              0.5 * (cell.im_min + cell.im_max)},
                             count});
            return;
        }
        split(cell, count);
    }

    void split(const Rectangle& cell, int parent_count) {
        for (int attempt = 0; attempt < kMaxNudges; ++attempt) {
            // jitter the split lines away from any root sitting on them
            const double jr = cell.width() * 1e-6 * static_cast<double>(attempt * attempt);
            const double ji = cell.height() * 1e-6 * static_cast<double>(attempt * attempt);
            const double mr = 0.5 * (cell.re_min + cell.re_max) +
                              ((attempt % 2 == 0) ? jr : -jr);
            const double mi = 0.5 * (cell.im_min + cell.im_max) +
                              ((attempt % 2 == 0) ? ji : -ji);
            Rectangle quads[4] = {
                {cell.re_min, mr, cell.im_min, mi},
                {mr, cell.re_max, cell.im_min, mi},
                {cell.re_min, mr, mi, cell.im_max},
                {mr, cell.re_max, mi, cell.im_max},
            };
            int counts[4];
            bool ok = true;
            int sum = 0;
            for (int q = 0; q < 4 && ok; ++q) {
                try {
                    counts[q] = winding_number_impl(m, quads[q]);
                    sum += counts[q];
                } catch (const RootNearContour&) {
                    ok = false;
                }
            }
            if (!ok) continue;
            if (sum != parent_count) {
                // a root escaped through a nudged line; retry with another jitter
                continue;
            }
            for (int q = 0; q < 4; ++q) gather(quads[q], counts[q]);
            return;
        }
        clean = false;
        note = "subdivision could not separate the winding count";
    }

    bool polish_simple(const Rectangle& cell) {
        Complex z{0.5 * (cell.re_min + cell.re_max), 0.5 * (cell.im_min + cell.im_max)};
        for (int it = 0; it < 60; ++it) {
            const Complex hz = char_eval(m, z);
            const Complex dz = char_derivative(m, z);
            if (std::abs(dz) == 0.0) return false;
            const Complex step = hz / dz;
            z -= step;
            if (std::abs(step) < 1e-14 * (1.0 + std::abs(z))) break;
        }
        // the winding count says the root is inside this cell; accept only a
        // polished point that stayed there, otherwise subdivide further
        const double slack = 1e-9 * (1.0 + std::abs(z));
        const bool inside = z.real() > cell.re_min - slack && z.real() < cell.re_max + slack &&
                            z.imag() > cell.im_min - slack && z.imag() < cell.im_max + slack;
        if (!inside) return false;
        if (std::abs(char_eval(m, z)) > 1e-12 * (1.0 + std::abs(z))) return false;
        roots.push_back({z, 1});
        return true;
    }
};

}  // namespace

bool Rectangle::contains(Complex z) const {
    return z.real() >= re_min && z.real() <= re_max && z.imag() >= im_min && z.imag() <= im_max;
}

int RootSet::total_multiplicity() const {
    int n = 0;
    for (const auto& r : roots) n += r.multiplicity;
    return n;
}

Complex char_eval(const SignedMeasure& mu_reflected, Complex lambda) {
    Complex s = lambda;
    for (const auto& a : mu_reflected.atoms) {
        s -= a.weight * std::exp(-lambda * a.location);
    }
    s -= density_transform(mu_reflected, lambda, false);
    return s;
}

Complex char_derivative(const SignedMeasure& mu_reflected, Complex lambda) {
    Complex s{1.0, 0.0};
    for (const auto& a : mu_reflected.atoms) {
        s += a.weight * a.location * std::exp(-lambda * a.location);
    }
    s += density_transform(mu_reflected, lambda, true);
    return s;
}

int winding_number(const SignedMeasure& mu_reflected, const Rectangle& rect) {
    return winding_number_impl(mu_reflected, rect);
}

Rectangle default_search_rectangle(const SignedMeasure& mu_reflected) {
    const double tau_eff = std::max(mu_reflected.extent(), 0.1);
    const double tv = mu_reflected.total_variation();
    Rectangle r;
    r.re_min = -10.0 / tau_eff;
    r.re_max = std::max(1.0, tv + 0.5);
    const double band = std::max(20.0 * kPi / tau_eff, tv + 0.5);
    r.im_min = -band;
    r.im_max = band;
    return r;
}

RootSet locate_roots(const SignedMeasure& mu_reflected) {
    return locate_roots(mu_reflected, default_search_rectangle(mu_reflected));
}

RootSet locate_roots(const SignedMeasure& mu_reflected, const Rectangle& rect) {
    mu_reflected.validate();
    RootSet rs;
    rs.total_variation = mu_reflected.total_variation();
    rs.tau = mu_reflected.extent();

    Rectangle work = rect;
    int total = 0;
    bool contour_ok = false;
    for (int attempt = 0; attempt < kMaxNudges && !contour_ok; ++attempt) {
        try {
            total = winding_number_impl(mu_reflected, work);
            contour_ok = true;
        } catch (const RootNearContour&) {
            const double dr = (rect.width() + 1.0) * 1e-6 * static_cast<double>(attempt + 1);
            const double di = (rect.height() + 1.0) * 1e-6 * static_cast<double>(attempt + 1);
            work.re_min -= dr;
            work.re_max += dr;
            work.im_min -= di;
            work.im_max += di;
        }
    }
    rs.rectangle = work;
    if (!contour_ok) {
        rs.count_certified = false;
        rs.note = "a root sits on the contour even after nudging";
        rs.v0 = std::numeric_limits<double>::quiet_NaN();
        return rs;
    }

    Subdivider sub{mu_reflected, {}, true, {}};
    sub.gather(work, total);
    rs.roots = std::move(sub.roots);

    // snap numerically-axis values and deduplicate
    for (auto& root : rs.roots) {
        const double scale = 1e-11 * (1.0 + std::abs(root.location));
        double re = root.location.real(), im = root.location.imag();
        if (std::abs(re) < scale) re = 0.0;
        if (std::abs(im) < scale) im = 0.0;
        root.location = {re, im};
    }
    std::sort(rs.roots.begin(), rs.roots.end(), [](const Root& a, const Root& b) {
        if (a.location.real() != b.location.real()) return a.location.real() > b.location.real();
        return a.location.imag() < b.location.imag();
    });
    for (std::size_t i = 1; i < rs.roots.size();) {
        if (std::abs(rs.roots[i].location - rs.roots[i - 1].location) < 1e-8) {
            rs.roots[i - 1].multiplicity += rs.roots[i].multiplicity;
            rs.roots.erase(rs.roots.begin() + static_cast<std::ptrdiff_t>(i));
        } else {
            ++i;
        }
    }

    rs.count_certified = sub.clean && rs.total_multiplicity() == total;
    if (!sub.note.empty()) rs.note = sub.note;
    rs.v0 = rs.roots.empty() ? -std::numeric_limits<double>::infinity()
                             : rs.roots.front().location.real();
    return rs;
}

namespace {

// Largest level L such that the a-priori bound |lambda| <= TV e^{|Re| tau}
// confines every root with Re >= L to the rectangle.
double capture_level(const RootSet& rs) {
    const double tv = rs.total_variation;
    const Rectangle& r = rs.rectangle;
    if (tv <= 0.0) return -std::numeric_limits<double>::infinity();
    if (r.re_max < tv - 1e-12) return std::numeric_limits<double>::infinity();
    const double cap_im = std::min(r.im_max, -r.im_min);
    if (cap_im < tv) return std::numeric_limits<double>::infinity();
    if (rs.tau <= 0.0) return std::max(r.re_min, -std::numeric_limits<double>::infinity());
    return std::max(r.re_min, -std::log(cap_im / tv) / rs.tau);
}

}  // namespace

Integrability integrability_verdict(const RootSet& rs) {
    if (!rs.count_certified) {
        throw std::invalid_argument("integrability_verdict: root set is not certified");
    }
    for (const auto& root : rs.roots) {
        if (root.location.real() >= 0.0) return Integrability::no;
    }
    const double bound = std::max(rs.roots.empty()
                                      ? -std::numeric_limits<double>::infinity()
                                      : rs.v0,
                                  capture_level(rs));
    if (bound < -1e-9) return Integrability::yes;
    return Integrability::inconclusive;
}

DecayRateReport decay_rate_check(const RootSet& rs, const ResolventBundle& b) {
    DecayRateReport rep;
    rep.expected = rs.v0;
    const double T = b.r.horizon();
    auto fit = detail::fit_envelope_rate(b.r, 0.5 * T, T);
    if (!fit.usable) fit = detail::fit_envelope_rate(b.r, 0.25 * T, 0.75 * T);
    if (!fit.usable) {
        rep.note = "resolvent is below the noise floor over the fit window";
        rep.pass = false;
        return rep;
    }
    rep.fitted_slope = fit.rate;
    rep.pass = std::abs(rep.fitted_slope - rep.expected) <= rep.tolerance;
    return rep;
}

ResonantMode resonant_mode(const SignedMeasure& mu_reflected, const RootSet& rs) {
    const Root* best = nullptr;
    for (const auto& root : rs.roots) {
        if (root.location.real() == 0.0 && root.location.imag() > 1e-9 &&
            root.multiplicity == 1) {
            if (best == nullptr || root.location.imag() < best->location.imag()) best = &root;
        }
    }
    if (best == nullptr) {
        throw std::invalid_argument(
            "resonant_mode: no simple imaginary-axis root pair; construction inapplicable");
    }
    ResonantMode mode;
    mode.beta = best->location.imag();
    const Complex hprime = char_derivative(mu_reflected, {0.0, mode.beta});
    if (std::abs(hprime) == 0.0) {
        throw std::runtime_error("resonant_mode: vanishing h' at a simple root");
    }
    mode.residue = 1.0 / hprime;
    mode.c1 = 2.0 * mode.residue.real();
    mode.k1 = -2.0 * mode.residue.imag();
    return mode;
}

GridFunction resonant_forcing(const SignedMeasure& mu_reflected, const RootSet& rs, double step,
                              double horizon) {
    const ResonantMode mode = resonant_mode(mu_reflected, rs);
    const auto n = static_cast<std::size_t>(std::llround(horizon / step)) + 1;
    return GridFunction::sample(0.0, step, n, [&mode](double t) {
        return mode.k1 * std::sin(mode.beta * t) - mode.c1 * std::cos(mode.beta * t);
    });
}

}  // namespace volterra
