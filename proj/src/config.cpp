#include "agmon/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "agmon/spectra.hpp"

namespace agmon {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

double to_double(const std::string& tok, const std::string& key, int line) {
    try {
        size_t pos = 0;
        const double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw config_error("config line " + std::to_string(line) + ": key '" + key +
                           "': cannot parse number '" + tok + "'");
    }
}

int to_int(const std::string& tok, const std::string& key, int line) {
    const double v = to_double(tok, key, line);
    const int i = static_cast<int>(std::lround(v));
    if (std::abs(v - i) > 1e-12)
        throw config_error("config line " + std::to_string(line) + ": key '" + key +
                           "' expects an integer, got '" + tok + "'");
    return i;
}

} // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
    ExperimentConfig cfg;
    cfg.raw_text = text;
    cfg.wells.clear();

    std::istringstream is(text);
    std::string line;
    std::string section;
    int ln = 0;
    bool have_domain_well = false;

    while (std::getline(is, line)) {
        ++ln;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw config_error("config line " + std::to_string(ln) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("config line " + std::to_string(ln) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        const auto toks = split_ws(val);
        auto need = [&](size_t k) {
            if (toks.size() < k)
                throw config_error("config line " + std::to_string(ln) + ": key '" + key +
                                   "' expects " + std::to_string(k) + " value(s)");
        };

        if (section == "kernel") {
            if (key == "dimension") { need(1); cfg.kernel_dim = to_int(toks[0], key, ln); }
            else if (key == "variant") {
                need(1);
                if (toks[0] != "atomic" && toks[0] != "density")
                    throw config_error("config line " + std::to_string(ln) +
                                       ": unknown kernel variant '" + toks[0] +
                                       "'; expected one of: atomic, density");
                cfg.kernel_variant = toks[0];
            }
            else if (key == "atom") {
                // "<off1> [off2] : <weight> [: r1]"
                std::string v = val;
                std::replace(v.begin(), v.end(), ':', ' ');
                const auto parts = split_ws(v);
                ExperimentConfig::AtomLine a;
                size_t noff = parts.size() >= 3 && cfg.kernel_dim == 2 ? 2 : 1;
                if (parts.size() < noff + 1)
                    throw config_error("config line " + std::to_string(ln) +
                                       ": key 'atom' expects 'offset : weight [: r1]'");
                a.offset[0] = to_double(parts[0], key, ln);
                if (noff == 2) a.offset[1] = to_double(parts[1], key, ln);
                a.weight = to_double(parts[noff], key, ln);
                if (parts.size() > noff + 1) a.r1 = to_double(parts[noff + 1], key, ln);
                cfg.atom_lines.push_back(a);
            }
            else if (key == "profile") {
                need(1);
                if (toks[0] != "gaussian" && toks[0] != "compact" && toks[0] != "exponential")
                    throw config_error("config line " + std::to_string(ln) +
                                       ": unknown profile '" + toks[0] +
                                       "'; expected one of: gaussian, compact, exponential");
                cfg.profile = toks[0];
            }
            else if (key == "scale") { need(1); cfg.profile_scale = to_double(toks[0], key, ln); }
            else if (key == "weight") { need(1); cfg.density_weight = to_double(toks[0], key, ln); }
            else if (key == "r1_weight") { need(1); cfg.density_r1 = to_double(toks[0], key, ln); }
            else if (key == "singularity") { need(1); cfg.singularity = to_double(toks[0], key, ln); }
            else throw config_error("config line " + std::to_string(ln) + ": unknown [kernel] key '" + key + "'");
        } else if (section == "potential") {
            if (key == "family") {
                need(1);
                if (toks[0] != "quadratic" && toks[0] != "quartic_double_well" &&
                    toks[0] != "inverted_gaussian")
                    throw config_error("config line " + std::to_string(ln) +
                                       ": unknown potential family '" + toks[0] +
                                       "'; expected one of: quadratic, quartic_double_well, inverted_gaussian");
                cfg.family = toks[0];
            }
            else if (key == "coeff") {
                need(1);
                cfg.quad = {to_double(toks[0], key, ln),
                            toks.size() > 1 ? to_double(toks[1], key, ln) : to_double(toks[0], key, ln),
                            toks.size() > 2 ? to_double(toks[2], key, ln) : 0.0};
            }
            else if (key == "quartic") { need(2); cfg.quartic_a = to_double(toks[0], key, ln); cfg.quartic_b = to_double(toks[1], key, ln); }
            else if (key == "ig") { need(2); cfg.ig_amp = to_double(toks[0], key, ln); cfg.ig_sigma = to_double(toks[1], key, ln); }
            else if (key == "well") {
                need(1);
                Vec w{to_double(toks[0], key, ln), toks.size() > 1 ? to_double(toks[1], key, ln) : 0.0};
                cfg.wells.push_back(w);
            }
            else if (key == "r1") {
                need(1);
                if (toks[0] == "none") { cfg.r1_kind = "none"; }
                else if (toks[0] == "ripple") {
                    need(2);
                    cfg.r1_kind = "ripple";
                    cfg.r1_amp = to_double(toks[1], key, ln);
                } else
                    throw config_error("config line " + std::to_string(ln) +
                                       ": unknown r1 kind '" + toks[0] + "'; expected one of: none, ripple");
            }
            else throw config_error("config line " + std::to_string(ln) + ": unknown [potential] key '" + key + "'");
        } else if (section == "domain") {
            if (key == "dimension") { need(1); cfg.dim = to_int(toks[0], key, ln); }
            else if (key == "box") {
                need(2);
                cfg.box_lo[0] = to_double(toks[0], key, ln);
                cfg.box_hi[0] = to_double(toks[1], key, ln);
                if (toks.size() >= 4) {
                    cfg.box_lo[1] = to_double(toks[2], key, ln);
                    cfg.box_hi[1] = to_double(toks[3], key, ln);
                }
            }
            else if (key == "h") { need(1); cfg.h = to_double(toks[0], key, ln); }
            else if (key == "sigma") {
                need(1);
                if (toks[0] == "box") cfg.sigma_shape = "box";
                else if (toks[0] == "ball") {
                    need(4);
                    cfg.sigma_shape = "ball";
                    cfg.ball_center = {to_double(toks[1], key, ln), to_double(toks[2], key, ln)};
                    cfg.ball_radius = to_double(toks[3], key, ln);
                } else
                    throw config_error("config line " + std::to_string(ln) +
                                       ": unknown sigma shape '" + toks[0] + "'; expected one of: box, ball");
            }
            else if (key == "well") {
                need(1);
                cfg.well = {to_double(toks[0], key, ln), toks.size() > 1 ? to_double(toks[1], key, ln) : 0.0};
                have_domain_well = true;
            }
            else throw config_error("config line " + std::to_string(ln) + ": unknown [domain] key '" + key + "'");
        } else if (section == "sweep") {
            if (key == "epsilon") {
                cfg.epsilons.clear();
                for (const auto& t : toks) cfg.epsilons.push_back(to_double(t, key, ln));
            }
            else if (key == "B") { need(1); cfg.B = to_double(toks[0], key, ln); }
            else if (key == "B_alpha") { need(1); cfg.B_alpha = to_double(toks[0], key, ln); }
            else if (key == "alpha") {
                cfg.alphas.clear();
                for (const auto& t : toks) cfg.alphas.push_back(to_double(t, key, ln));
            }
            else if (key == "R0") { need(1); cfg.R0 = to_double(toks[0], key, ln); }
            else if (key == "D") { need(1); cfg.D = to_double(toks[0], key, ln); }
            else if (key == "eta") { need(1); cfg.eta = to_double(toks[0], key, ln); }
            else if (key == "delta") { need(1); cfg.delta = to_double(toks[0], key, ln); }
            else if (key == "stencil_radius") { need(1); cfg.stencil_radius = to_int(toks[0], key, ln); }
            else if (key == "modes") {
                cfg.modes.clear();
                for (const auto& t : toks) {
                    if (t != "dirichlet" && t != "neumann")
                        throw config_error("config line " + std::to_string(ln) +
                                           ": unknown boundary mode '" + t + "'");
                    cfg.modes.push_back(t);
                }
            }
            else throw config_error("config line " + std::to_string(ln) + ": unknown [sweep] key '" + key + "'");
        } else if (section == "solver") {
            if (key == "k") { need(1); cfg.k = to_int(toks[0], key, ln); }
            else if (key == "tol") { need(1); cfg.tol = to_double(toks[0], key, ln); }
            else if (key == "max_iter") { need(1); cfg.max_iter = to_int(toks[0], key, ln); }
            else if (key == "cg_max") { need(1); cfg.cg_max = to_int(toks[0], key, ln); }
            else if (key == "seed") { need(1); cfg.seed = static_cast<unsigned>(to_int(toks[0], key, ln)); }
            else throw config_error("config line " + std::to_string(ln) + ": unknown [solver] key '" + key + "'");
        } else if (section == "output") {
            if (key == "dir") { need(1); cfg.out_dir = toks[0]; }
            else throw config_error("config line " + std::to_string(ln) + ": unknown [output] key '" + key + "'");
        } else {
            throw config_error("config line " + std::to_string(ln) + ": key '" + key +
                               "' outside a known section (" + origin + ")");
        }
    }

    if (cfg.wells.empty()) cfg.wells.push_back(cfg.well);
    if (!have_domain_well && !cfg.wells.empty()) cfg.well = cfg.wells.front();

    // alignment of every sweep epsilon
    for (double e : cfg.epsilons) {
        const double ratio = e / cfg.h;
        if (std::abs(ratio - std::lround(ratio)) > 1e-9 * std::max(1.0, ratio) || ratio < 1)
            throw config_error("sweep epsilon = " + std::to_string(e) +
                               " is not an integer multiple of h = " + std::to_string(cfg.h));
    }
    for (double a : cfg.alphas)
        if (!(a > 0 && a <= 1))
            throw config_error("sweep alpha = " + std::to_string(a) + " outside (0,1]");
    return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw config_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str(), path);
}

GridDomain ExperimentConfig::build_grid() const {
    if (sigma_shape == "ball")
        return GridDomain::ball(ball_center, ball_radius, h, well);
    return GridDomain::box(dim, box_lo, box_hi, h, well);
}

KernelSpec ExperimentConfig::build_kernel() const {
    KernelSpec k;
    k.dim = kernel_dim;
    if (kernel_variant == "atomic") {
        k.variant = KernelVariant::Atomic;
        if (atom_lines.empty()) throw config_error("[kernel] atomic variant needs atom lines");
        for (const auto& a : atom_lines) {
            AtomSpec s;
            s.offset = a.offset;
            s.weight = const_fn(a.weight);
            if (a.r1 != 0) s.r1_weight = const_fn(a.r1);
            k.atoms.push_back(std::move(s));
        }
    } else {
        k.variant = KernelVariant::Density;
        if (profile == "gaussian") k.profile.tail = TailClass::Gaussian;
        else if (profile == "compact") k.profile.tail = TailClass::Compact;
        else k.profile.tail = TailClass::Exponential;
        k.profile.scale = profile_scale;
        k.weight = const_fn(density_weight);
        if (density_r1 != 0) k.r1_weight = const_fn(density_r1);
        if (singularity >= 0) {
            if (singularity >= 2) throw config_error("[kernel] singularity exponent must be < 2");
            k.singularity = singularity;
        }
    }
    return k;
}

PotentialSpec ExperimentConfig::build_potential() const {
    PotentialSpec p;
    p.dim = dim;
    if (family == "quadratic") p.family = PotentialFamily::Quadratic;
    else if (family == "quartic_double_well") p.family = PotentialFamily::QuarticDoubleWell;
    else p.family = PotentialFamily::InvertedGaussian;
    p.quad = quad;
    p.quartic_a = quartic_a;
    p.quartic_b = quartic_b;
    p.ig_amp = ig_amp;
    p.ig_sigma = ig_sigma;
    p.wells = wells;
    if (r1_kind == "ripple") {
        const double amp = r1_amp;
        const int dd = dim;
        // lattice-commensurate ripple: constant on each eps-translation class,
        // so the near-degenerate class cluster splits at a resolvable scale
        p.r1 = [amp, dd](const Vec& x, double eps) {
            double s = 1.0 - std::cos(2.0 * M_PI * x[0] / eps);
            if (dd == 2) s += 1.0 - std::cos(2.0 * M_PI * x[1] / eps);
            return amp * eps * s;
        };
    }
    return p;
}

SolverOptions ExperimentConfig::solver_options() const {
    SolverOptions o;
    o.k = k;
    o.tol = tol;
    o.max_lanczos = max_iter;
    o.cg_max = cg_max;
    o.seed = seed;
    return o;
}

} // namespace agmon
