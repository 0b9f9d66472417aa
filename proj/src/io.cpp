#include "nlslab/io.hpp"

#include <nlohmann/json.hpp>
#include <zlib.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nlslab/detail/base_profile.hpp"

namespace nlslab {

using nlohmann::json;

void require_known_keys(const json& obj, const std::vector<std::string>& allowed,
                        const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const auto& k : allowed)
            if (it.key() == k) { ok = true; break; }
        if (!ok) throw ConfigError("unknown key \"" + it.key() + "\" in " + where);
    }
}

json profile_to_json(const GroundStateProfile& profile) {
    const auto& b = profile.base();
    json j;
    j["p"] = b.nl.p;
    j["lambda"] = b.nl.lambda;
    j["dim"] = b.dim;
    j["mu"] = profile.mu();
    j["eps"] = profile.eps();
    j["alpha"] = b.alpha;
    j["base_l2"] = b.base_l2;
    j["samples"] = b.samples;
    j["samples_dr"] = b.samples_dr;
    j["closed_form"] = b.closed_form;
    if (b.closed_form) {
        j["amp"] = b.amp;
        j["expb"] = b.expb;
        j["cc"] = b.cc;
    } else {
        j["cos_coeff"] = b.cos_coeff;
        j["solve_box"] = b.solve_box;
        j["tail_r"] = b.tail_r;
        j["tail_log"] = b.tail_log;
        j["tail_slope"] = b.tail_slope;
    }
    return j;
}

GroundStateProfile profile_from_json(const json& j) {
    require_known_keys(j,
                       {"p", "lambda", "dim", "mu", "eps", "alpha", "base_l2", "samples",
                        "samples_dr", "closed_form", "amp", "expb", "cc", "cos_coeff",
                        "solve_box", "tail_r", "tail_log", "tail_slope"},
                       "profile document");
    NonlinearitySpec nl(j.at("p").get<double>(), j.at("lambda").get<double>(),
                        j.at("dim").get<int>());
    auto bp = std::make_shared<detail::BaseProfile>(nl);
    bp->alpha = j.at("alpha").get<double>();
    bp->base_l2 = j.at("base_l2").get<double>();
    bp->samples = j.at("samples").get<std::vector<double>>();
    bp->samples_dr = j.at("samples_dr").get<double>();
    bp->closed_form = j.at("closed_form").get<bool>();
    if (bp->closed_form) {
        bp->amp = j.at("amp").get<double>();
        bp->expb = j.at("expb").get<double>();
        bp->cc = j.at("cc").get<double>();
    } else {
        bp->cos_coeff = j.at("cos_coeff").get<std::vector<double>>();
        bp->solve_box = j.at("solve_box").get<double>();
        bp->tail_r = j.at("tail_r").get<double>();
        bp->tail_log = j.at("tail_log").get<double>();
        bp->tail_slope = j.at("tail_slope").get<double>();
    }
    return GroundStateProfile(std::move(bp), j.at("mu").get<double>(), j.at("eps").get<double>());
}

json manifold_to_json(const ManifoldPoint& point, double p, double lambda, int dim) {
    json j;
    j["eps"] = point.eps;
    j["p"] = p;
    j["lambda"] = lambda;
    j["solitons"] = json::array();
    for (const auto& s : point.solitons) {
        std::vector<double> a(s.a.begin(), s.a.begin() + dim);
        std::vector<double> v(s.v.begin(), s.v.begin() + dim);
        j["solitons"].push_back({{"a", a}, {"v", v}, {"gamma", s.gamma}, {"mu", s.mu}});
    }
    return j;
}

ManifoldDocument manifold_from_json(const json& j) {
    require_known_keys(j, {"eps", "p", "lambda", "solitons"}, "manifold document");
    ManifoldDocument doc;
    doc.point.eps = j.at("eps").get<double>();
    doc.p = j.at("p").get<double>();
    doc.lambda = j.at("lambda").get<double>();
    for (const auto& s : j.at("solitons")) {
        require_known_keys(s, {"a", "v", "gamma", "mu"}, "manifold document soliton");
        SolitonParams sp;
        auto a = s.at("a").get<std::vector<double>>();
        auto v = s.at("v").get<std::vector<double>>();
        doc.dim = static_cast<int>(a.size());
        for (std::size_t i = 0; i < a.size() && i < 2; ++i) sp.a[i] = a[i];
        for (std::size_t i = 0; i < v.size() && i < 2; ++i) sp.v[i] = v[i];
        sp.gamma = s.at("gamma").get<double>();
        sp.mu = s.at("mu").get<double>();
        doc.point.solitons.push_back(sp);
    }
    return doc;
}

void write_gzip_file(const std::string& path, const std::string& content) {
    gzFile f = gzopen(path.c_str(), "wb");
    if (!f) throw IoError("cannot open for writing: " + path);
    std::size_t off = 0;
    while (off < content.size()) {
        unsigned chunk = static_cast<unsigned>(std::min<std::size_t>(content.size() - off, 1u << 20));
        int wrote = gzwrite(f, content.data() + off, chunk);
        if (wrote <= 0) {
            gzclose(f);
            throw IoError("gzwrite failed: " + path);
        }
        off += static_cast<std::size_t>(wrote);
    }
    gzclose(f);
}

std::string read_gzip_file(const std::string& path) {
    gzFile f = gzopen(path.c_str(), "rb");
    if (!f) throw IoError("cannot open for reading: " + path);
    std::string out;
    char buf[1 << 16];
    int got;
    while ((got = gzread(f, buf, sizeof(buf))) > 0) out.append(buf, static_cast<std::size_t>(got));
    gzclose(f);
    if (got < 0) throw IoError("gzread failed: " + path);
    return out;
}

void save_checkpoint(const std::string& path, const EvolutionState& state) {
    const Grid& g = state.psi.grid();
    json j;
    j["t"] = state.t;
    j["eps"] = state.eps;
    j["grid"] = {{"dim", g.dim()}, {"points", g.points_per_axis()}, {"box", g.box_length()}};
    std::vector<double> re(g.size()), im(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        re[i] = state.psi[i].real();
        im[i] = state.psi[i].imag();
    }
    j["psi_re"] = re;
    j["psi_im"] = im;
    write_gzip_file(path, j.dump());
}

EvolutionState load_checkpoint(const std::string& path) {
    json j = json::parse(read_gzip_file(path));
    require_known_keys(j, {"t", "eps", "grid", "psi_re", "psi_im"}, "checkpoint");
    const auto& jg = j.at("grid");
    require_known_keys(jg, {"dim", "points", "box"}, "checkpoint grid");
    Grid g(jg.at("dim").get<int>(), jg.at("points").get<int>(), jg.at("box").get<double>());
    auto re = j.at("psi_re").get<std::vector<double>>();
    auto im = j.at("psi_im").get<std::vector<double>>();
    if (re.size() != g.size() || im.size() != g.size())
        throw IoError("checkpoint sample count disagrees with grid");
    EvolutionState state{Field(g), j.at("t").get<double>(), j.at("eps").get<double>()};
    for (std::size_t i = 0; i < g.size(); ++i) state.psi[i] = Complex(re[i], im[i]);
    return state;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << content;
    if (!f) throw IoError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for reading: " + path);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

} // namespace nlslab
