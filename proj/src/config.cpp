#include "vibroid/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace vibroid {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& text, const std::string& what) {
    try {
        size_t used = 0;
        const double v = std::stod(text, &used);
        if (trim(text.substr(used)).empty()) return v;
    } catch (const std::exception&) {
    }
    throw std::runtime_error("config: " + what + ": bad number '" + text + "'");
}

long parse_long(const std::string& text, const std::string& what) {
    try {
        size_t used = 0;
        const long v = std::stol(text, &used);
        if (trim(text.substr(used)).empty()) return v;
    } catch (const std::exception&) {
    }
    throw std::runtime_error("config: " + what + ": bad integer '" + text + "'");
}

bool parse_bool(const std::string& text, const std::string& what) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw std::runtime_error("config: " + what + ": bad boolean '" + text + "'");
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, sep)) parts.push_back(trim(part));
    if (!parts.empty() && parts.back().empty()) parts.pop_back();
    return parts;
}

std::vector<double> parse_double_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    for (const auto& part : split(text, ',')) {
        if (!part.empty()) out.push_back(parse_double(part, what));
    }
    return out;
}

std::vector<Index> parse_index_list(const std::string& text, const std::string& what) {
    std::vector<Index> out;
    for (const auto& part : split(text, ',')) {
        if (part.empty()) continue;
        const long v = parse_long(part, what);
        if (v < 0) {
            throw std::runtime_error("config: " + what + ": indices are zero-based and "
                                     "nonnegative, got " + part);
        }
        out.push_back(static_cast<Index>(v));
    }
    return out;
}

/// `min:max:count` log-spaced grid, or a plain comma list.
std::vector<double> parse_alpha_grid(const std::string& text) {
    if (text.find(':') == std::string::npos) {
        return parse_double_list(text, "alpha_grid");
    }
    const auto parts = split(text, ':');
    if (parts.size() != 3) {
        throw std::runtime_error("config: alpha_grid: expected 'min:max:count', got '" + text +
                                 "'");
    }
    const double lo = parse_double(parts[0], "alpha_grid min");
    const double hi = parse_double(parts[1], "alpha_grid max");
    const long count = parse_long(parts[2], "alpha_grid count");
    if (!(lo > 0.0) || !(hi > lo) || count < 2) {
        throw std::runtime_error("config: alpha_grid: need 0 < min < max and count >= 2");
    }
    std::vector<double> grid(static_cast<size_t>(count));
    const double step = (std::log10(hi) - std::log10(lo)) / static_cast<double>(count - 1);
    for (long i = 0; i < count; ++i) {
        grid[static_cast<size_t>(i)] = std::pow(10.0, std::log10(lo) + step * i);
    }
    return grid;
}

double portable_uniform(std::mt19937_64& engine) {
    return static_cast<double>(engine() >> 11) * 0x1.0p-53;  // [0, 1)
}

std::vector<SineTerm> random_composition(const std::string& args_text) {
    long count = -1, seed = -1;
    double band = -1.0, amp = -1.0;
    for (const auto& arg : split(args_text, ',')) {
        const auto eq = arg.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("profile: random(): expected key=value, got '" + arg + "'");
        }
        const std::string key = trim(arg.substr(0, eq));
        const std::string val = trim(arg.substr(eq + 1));
        if (key == "count") count = parse_long(val, "random count");
        else if (key == "band") band = parse_double(val, "random band");
        else if (key == "amp") amp = parse_double(val, "random amp");
        else if (key == "seed") seed = parse_long(val, "random seed");
        else throw std::runtime_error("profile: random(): unknown key '" + key + "'");
    }
    if (count < 1 || band <= 0.0 || amp <= 0.0 || seed < 0) {
        throw std::runtime_error(
            "profile: random() needs count >= 1, band > 0, amp > 0, seed >= 0");
    }
    std::mt19937_64 engine(static_cast<std::uint64_t>(seed));
    std::vector<SineTerm> terms(static_cast<size_t>(count));
    for (auto& term : terms) {
        // (0, 1] draws keep frequency and amplitude strictly positive.
        term.omega = 2.0 * std::numbers::pi * band * (1.0 - portable_uniform(engine));
        term.amplitude = amp * (1.0 - portable_uniform(engine));
        term.phase = 2.0 * std::numbers::pi * portable_uniform(engine);
    }
    return terms;
}

SineTerm parse_sine_term(const std::string& term_text) {
    // Accepted shapes: A*sin(W*pi*t) and A*sin(W*t).
    const auto star = term_text.find('*');
    const auto open = term_text.find("sin(");
    if (star == std::string::npos || open == std::string::npos || open < star ||
        term_text.back() != ')') {
        throw std::runtime_error("profile: expected 'A*sin(W*pi*t)', got '" + term_text + "'");
    }
    SineTerm term;
    term.amplitude = parse_double(trim(term_text.substr(0, star)), "profile amplitude");
    std::string inner = trim(term_text.substr(open + 4, term_text.size() - open - 5));
    bool with_pi = false;
    const auto strip_suffix = [&inner](const std::string& suffix) {
        if (inner.size() >= suffix.size() &&
            inner.compare(inner.size() - suffix.size(), suffix.size(), suffix) == 0) {
            inner = trim(inner.substr(0, inner.size() - suffix.size()));
            return true;
        }
        return false;
    };
    if (strip_suffix("*pi*t")) {
        with_pi = true;
    } else if (!strip_suffix("*t")) {
        throw std::runtime_error("profile: sin argument must end in '*pi*t' or '*t', got '" +
                                 term_text + "'");
    }
    const double w = parse_double(inner, "profile frequency coefficient");
    term.omega = with_pi ? w * std::numbers::pi : w;
    return term;
}

}  // namespace

double ForceProfile::value(double t) const {
    double sum = 0.0;
    for (const auto& term : terms) {
        sum += term.amplitude * std::sin(term.omega * t + term.phase);
    }
    return sum;
}

std::vector<SineTerm> parse_force_profile(const std::string& text) {
    const std::string body = trim(text);
    if (body.empty()) {
        throw std::runtime_error("profile: empty expression");
    }
    if (body.rfind("random(", 0) == 0) {
        if (body.back() != ')') {
            throw std::runtime_error("profile: unterminated random(), got '" + body + "'");
        }
        return random_composition(body.substr(7, body.size() - 8));
    }
    // Split the sum on '+' at paren depth zero.
    std::vector<SineTerm> terms;
    std::string current;
    int depth = 0;
    for (char ch : body) {
        if (ch == '(') ++depth;
        if (ch == ')') --depth;
        if (ch == '+' && depth == 0) {
            terms.push_back(parse_sine_term(trim(current)));
            current.clear();
        } else {
            current += ch;
        }
    }
    terms.push_back(parse_sine_term(trim(current)));
    return terms;
}

std::vector<ConfigSection> parse_ini(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("config: cannot read " + path.string());
    }
    std::vector<ConfigSection> sections;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        // Comments start with '#' or ';' at line start or after whitespace.
        for (size_t i = 0; i < line.size(); ++i) {
            if ((line[i] == '#' || line[i] == ';') &&
                (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
                line.erase(i);
                break;
            }
        }
        const std::string body = trim(line);
        if (body.empty()) continue;
        if (body.front() == '[') {
            if (body.back() != ']') {
                throw std::runtime_error("config: " + path.string() + ":" +
                                         std::to_string(line_no) + ": unterminated section");
            }
            sections.push_back({trim(body.substr(1, body.size() - 2)), {}, line_no});
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("config: " + path.string() + ":" +
                                     std::to_string(line_no) + ": expected key = value");
        }
        if (sections.empty()) {
            throw std::runtime_error("config: " + path.string() + ":" +
                                     std::to_string(line_no) + ": key outside any section");
        }
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        auto& entries = sections.back().entries;
        if (!entries.emplace(key, value).second) {
            throw std::runtime_error("config: " + path.string() + ":" +
                                     std::to_string(line_no) + ": duplicate key '" + key +
                                     "' in [" + sections.back().name + "]");
        }
    }
    return sections;
}

void ExperimentConfig::validate() const {
    if (!(duration > 0.0)) {
        throw std::runtime_error("config: duration must be positive");
    }
    if (repeats < 1) {
        throw std::runtime_error("config: repeats must be at least 1");
    }
    newmark.validate();
    noise.validate();
    std::set<Index> force_dofs(selection.force_idx.begin(), selection.force_idx.end());
    std::set<Index> seen;
    for (const auto& profile : forces) {
        if (force_dofs.count(profile.dof) == 0) {
            throw std::runtime_error("config: [force] dof " + std::to_string(profile.dof) +
                                     " is not listed in force_idx");
        }
        if (!seen.insert(profile.dof).second) {
            throw std::runtime_error("config: two [force] sections target dof " +
                                     std::to_string(profile.dof));
        }
    }
    if (alpha_from_l_curve) {
        if (alpha_grid.empty()) {
            throw std::runtime_error("config: alpha = l_curve needs alpha_grid");
        }
        if (!(l_curve_window > 0.0)) {
            throw std::runtime_error("config: l_curve_window must be positive");
        }
    } else if (alpha < 0.0) {
        throw std::runtime_error("config: alpha must be nonnegative");
    }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    ExperimentConfig cfg;
    const auto sections = parse_ini(path);
    const auto fail = [&](const ConfigSection& sec, const std::string& msg) {
        throw std::runtime_error("config: " + path.string() + ": [" + sec.name + "]: " + msg);
    };
    const auto unknown_key_check = [&](const ConfigSection& sec,
                                       const std::set<std::string>& known) {
        for (const auto& [key, value] : sec.entries) {
            (void)value;
            if (known.count(key) == 0) fail(sec, "unknown key '" + key + "'");
        }
    };

    bool seen_model = false;
    for (const auto& sec : sections) {
        const auto get = [&sec](const std::string& key) -> const std::string* {
            const auto it = sec.entries.find(key);
            return it == sec.entries.end() ? nullptr : &it->second;
        };
        if (sec.name == "model") {
            if (seen_model) fail(sec, "duplicate [model] section");
            seen_model = true;
            unknown_key_check(
                sec, {"kind", "manifest", "n_struct_elems", "n_fluid_elems", "youngs_modulus",
                      "rho_struct", "area", "len_struct", "len_fluid", "rho_fluid",
                      "sound_speed", "fix_struct_left", "fix_struct_right", "open_fluid_left",
                      "open_fluid_right", "piston_coupled"});
            if (const auto* v = get("manifest")) {
                cfg.use_manifest = true;
                cfg.manifest = path.parent_path() / *v;
                continue;
            }
            if (const auto* v = get("kind")) {
                if (*v == "rod_tube_piston") cfg.toy.kind = ToyKind::rod_tube_piston;
                else if (*v == "spring_mass_chain") cfg.toy.kind = ToyKind::spring_mass_chain;
                else fail(sec, "unknown kind '" + *v + "'");
            }
            if (const auto* v = get("n_struct_elems"))
                cfg.toy.n_struct_elems = static_cast<int>(parse_long(*v, "n_struct_elems"));
            if (const auto* v = get("n_fluid_elems"))
                cfg.toy.n_fluid_elems = static_cast<int>(parse_long(*v, "n_fluid_elems"));
            if (const auto* v = get("youngs_modulus"))
                cfg.toy.youngs_modulus = parse_double(*v, "youngs_modulus");
            if (const auto* v = get("rho_struct"))
                cfg.toy.rho_struct = parse_double(*v, "rho_struct");
            if (const auto* v = get("area")) cfg.toy.area = parse_double(*v, "area");
            if (const auto* v = get("len_struct"))
                cfg.toy.len_struct = parse_double(*v, "len_struct");
            if (const auto* v = get("len_fluid"))
                cfg.toy.len_fluid = parse_double(*v, "len_fluid");
            if (const auto* v = get("rho_fluid"))
                cfg.toy.rho_fluid = parse_double(*v, "rho_fluid");
            if (const auto* v = get("sound_speed"))
                cfg.toy.sound_speed = parse_double(*v, "sound_speed");
            if (const auto* v = get("fix_struct_left"))
                cfg.toy.ends.fix_struct_left = parse_bool(*v, "fix_struct_left");
            if (const auto* v = get("fix_struct_right"))
                cfg.toy.ends.fix_struct_right = parse_bool(*v, "fix_struct_right");
            if (const auto* v = get("open_fluid_left"))
                cfg.toy.ends.open_fluid_left = parse_bool(*v, "open_fluid_left");
            if (const auto* v = get("open_fluid_right"))
                cfg.toy.ends.open_fluid_right = parse_bool(*v, "open_fluid_right");
            if (const auto* v = get("piston_coupled"))
                cfg.toy.ends.piston_coupled = parse_bool(*v, "piston_coupled");
        } else if (sec.name == "rom") {
            unknown_key_check(sec, {"n_modes_struct", "n_modes_fluid", "mass_normalize"});
            if (const auto* v = get("n_modes_struct"))
                cfg.rom.n_modes_struct = static_cast<int>(parse_long(*v, "n_modes_struct"));
            if (const auto* v = get("n_modes_fluid"))
                cfg.rom.n_modes_fluid = static_cast<int>(parse_long(*v, "n_modes_fluid"));
            if (const auto* v = get("mass_normalize"))
                cfg.rom.mass_normalize = parse_bool(*v, "mass_normalize");
        } else if (sec.name == "damping") {
            unknown_key_check(sec, {"a1_struct", "a2_struct", "a1_fluid", "a2_fluid"});
            if (const auto* v = get("a1_struct"))
                cfg.damping.a1_struct = parse_double(*v, "a1_struct");
            if (const auto* v = get("a2_struct"))
                cfg.damping.a2_struct = parse_double(*v, "a2_struct");
            if (const auto* v = get("a1_fluid"))
                cfg.damping.a1_fluid = parse_double(*v, "a1_fluid");
            if (const auto* v = get("a2_fluid"))
                cfg.damping.a2_fluid = parse_double(*v, "a2_fluid");
        } else if (sec.name == "newmark") {
            unknown_key_check(sec, {"dt", "beta", "delta"});
            if (const auto* v = get("dt")) cfg.newmark.dt = parse_double(*v, "dt");
            if (const auto* v = get("beta")) cfg.newmark.beta = parse_double(*v, "beta");
            if (const auto* v = get("delta")) cfg.newmark.delta = parse_double(*v, "delta");
        } else if (sec.name == "selection") {
            unknown_key_check(sec, {"disp_idx", "vel_idx", "acc_idx", "force_idx"});
            if (const auto* v = get("disp_idx"))
                cfg.selection.disp_idx = parse_index_list(*v, "disp_idx");
            if (const auto* v = get("vel_idx"))
                cfg.selection.vel_idx = parse_index_list(*v, "vel_idx");
            if (const auto* v = get("acc_idx"))
                cfg.selection.acc_idx = parse_index_list(*v, "acc_idx");
            if (const auto* v = get("force_idx"))
                cfg.selection.force_idx = parse_index_list(*v, "force_idx");
        } else if (sec.name == "force") {
            unknown_key_check(sec, {"dof", "profile"});
            const auto* dof = get("dof");
            const auto* profile = get("profile");
            if (dof == nullptr || profile == nullptr) {
                fail(sec, "[force] needs both dof and profile");
            }
            ForceProfile fp;
            const long d = parse_long(*dof, "force dof");
            if (d < 0) fail(sec, "force dof must be nonnegative (zero-based)");
            fp.dof = static_cast<Index>(d);
            fp.terms = parse_force_profile(*profile);
            cfg.forces.push_back(std::move(fp));
        } else if (sec.name == "noise") {
            unknown_key_check(sec, {"tau", "seed"});
            if (const auto* v = get("tau")) cfg.noise.tau = parse_double(*v, "tau");
            if (const auto* v = get("seed"))
                cfg.noise.seed = static_cast<std::uint64_t>(parse_long(*v, "seed"));
        } else if (sec.name == "identification") {
            unknown_key_check(sec, {"method", "alpha", "alpha_grid", "l_curve_window"});
            if (const auto* v = get("method")) {
                if (*v == "proposed") cfg.method = Method::proposed;
                else if (*v == "akf") cfg.method = Method::akf;
                else if (*v == "both") cfg.method = Method::both;
                else fail(sec, "unknown method '" + *v + "'");
            }
            if (const auto* v = get("alpha")) {
                if (*v == "l_curve") cfg.alpha_from_l_curve = true;
                else cfg.alpha = parse_double(*v, "alpha");
            }
            if (const auto* v = get("alpha_grid")) cfg.alpha_grid = parse_alpha_grid(*v);
            if (const auto* v = get("l_curve_window"))
                cfg.l_curve_window = parse_double(*v, "l_curve_window");
        } else if (sec.name == "akf") {
            unknown_key_check(sec, {"q_force", "q_state", "p0", "r_floor"});
            if (const auto* v = get("q_force")) cfg.akf_q_force = parse_double(*v, "q_force");
            if (const auto* v = get("q_state")) cfg.akf_q_state = parse_double(*v, "q_state");
            if (const auto* v = get("p0")) cfg.akf_p0 = parse_double(*v, "p0");
            if (const auto* v = get("r_floor")) cfg.akf_r_floor = parse_double(*v, "r_floor");
        } else if (sec.name == "run") {
            unknown_key_check(sec, {"duration", "repeats", "out_dir"});
            if (const auto* v = get("duration")) cfg.duration = parse_double(*v, "duration");
            if (const auto* v = get("repeats"))
                cfg.repeats = static_cast<int>(parse_long(*v, "repeats"));
            if (const auto* v = get("out_dir")) cfg.out_dir = *v;
        } else if (sec.name == "sweep") {
            unknown_key_check(sec, {"taus"});
            if (const auto* v = get("taus")) cfg.sweep_taus = parse_double_list(*v, "taus");
        } else if (sec.name == "compare") {
            unknown_key_check(sec, {"akf_dt_divisors"});
            if (const auto* v = get("akf_dt_divisors"))
                cfg.akf_dt_divisors = parse_double_list(*v, "akf_dt_divisors");
        } else {
            throw std::runtime_error("config: " + path.string() + ":" +
                                     std::to_string(sec.line) + ": unknown section [" +
                                     sec.name + "]");
        }
    }
    cfg.validate();
    return cfg;
}

Matrix force_time_matrix(const std::vector<ForceProfile>& profiles,
                         const std::vector<Index>& force_idx, double dt, Index samples) {
    Matrix f = Matrix::Zero(static_cast<Index>(force_idx.size()), samples);
    for (const auto& profile : profiles) {
        const auto it = std::find(force_idx.begin(), force_idx.end(), profile.dof);
        if (it == force_idx.end()) {
            throw std::runtime_error("force_time_matrix: profile dof " +
                                     std::to_string(profile.dof) + " not in force_idx");
        }
        const Index row = static_cast<Index>(it - force_idx.begin());
        for (Index k = 0; k < samples; ++k) {
            f(row, k) = profile.value(dt * static_cast<double>(k));
        }
    }
    return f;
}

}  // namespace vibroid
