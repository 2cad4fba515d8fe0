#include "curvwomb/io.hpp"

#include "curvwomb/quadrature.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string_view>

namespace curvwomb::io {

using nlohmann::json;

namespace {

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

double parse_number(std::string_view field, std::size_t line, std::string_view column) {
    const std::string s(field);
    if (s.empty()) throw ParseError(line, "empty value in column '" + std::string(column) + "'");
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || errno == ERANGE)
        throw ParseError(line, "non-numeric value '" + s + "' in column '" + std::string(column) + "'");
    return v;
}

bool blank(std::string_view line) { return trim(line).empty(); }

json vec2_json(const Vec2& v) { return json::array({v[0], v[1]}); }

Vec2 json_vec2(const json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ConfigError(what + " must be a pair [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(what + " is not valid JSON: " + e.what());
    }
}

void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (std::string_view a : allowed) ok = ok || key == a;
        if (!ok) throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

template <class T>
T get_as(const json& obj, const char* key, T fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("'" + std::string(key) + "' in " + where + " has the wrong type");
    }
}

json summary_json(const Summary& s) {
    return {{"median", s.median}, {"lower", s.lower}, {"upper", s.upper}, {"flag", to_string(s.flag)}};
}

json matrix_json(const Mat& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
        rows.push_back(r);
    }
    return rows;
}

Mat json_matrix(const json& j, Eigen::Index cols, const std::string& what) {
    if (!j.is_array()) throw ConfigError(what + " must be an array of rows");
    Mat m(static_cast<Eigen::Index>(j.size()), cols);
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_array() || static_cast<Eigen::Index>(j[i].size()) != cols)
            throw ConfigError(what + " row " + std::to_string(i) + " has the wrong length");
        for (Eigen::Index c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(i), c) = j[i][c].get<double>();
    }
    return m;
}

}  // namespace

// ---------------------------------------------------------------- dataset

SpatialDataset parse_dataset_csv(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++lineno;
        if (blank(line)) continue;
        for (std::string_view h : split(line)) header.emplace_back(h);
        break;
    }
    if (header.empty()) throw ParseError(lineno == 0 ? 1 : lineno, "missing header");
    if (header.size() < 3 || header[0] != "s1" || header[1] != "s2" || header[2] != "y")
        throw ParseError(lineno, "header must start with s1,s2,y");
    const std::size_t ncol = header.size();

    std::vector<std::array<double, 2>> locs;
    std::vector<double> ys;
    std::vector<std::vector<double>> covs;
    std::vector<std::size_t> lines;
    while (std::getline(in, line)) {
        ++lineno;
        if (blank(line)) continue;
        const auto fields = split(line);
        if (fields.size() != ncol)
            throw ParseError(lineno, "expected " + std::to_string(ncol) + " columns, found " + std::to_string(fields.size()));
        locs.push_back({parse_number(fields[0], lineno, "s1"), parse_number(fields[1], lineno, "s2")});
        ys.push_back(parse_number(fields[2], lineno, "y"));
        std::vector<double> row;
        for (std::size_t c = 3; c < ncol; ++c) row.push_back(parse_number(fields[c], lineno, header[c]));
        covs.push_back(std::move(row));
        lines.push_back(lineno);
        for (double v : {locs.back()[0], locs.back()[1], ys.back()})
            if (!std::isfinite(v)) throw ParseError(lineno, "non-finite value");
    }
    const auto L = static_cast<Eigen::Index>(ys.size());
    if (L == 0) throw ParseError(lineno + 1, "no data rows");

    SpatialDataset d;
    d.locations.resize(L, 2);
    d.y.resize(L);
    d.X.resize(L, static_cast<Eigen::Index>(ncol - 2));
    for (Eigen::Index i = 0; i < L; ++i) {
        d.locations.row(i) << locs[i][0], locs[i][1];
        d.y[i] = ys[i];
        d.X(i, 0) = 1.0;
        for (std::size_t c = 0; c + 3 < ncol; ++c) d.X(i, static_cast<Eigen::Index>(c + 1)) = covs[i][c];
    }
    for (Eigen::Index i = 0; i < L; ++i)
        for (Eigen::Index j = 0; j < i; ++j)
            if ((d.locations.row(i) - d.locations.row(j)).norm() <= 1e-12)
                throw DuplicateLocation("line " + std::to_string(lines[i]) + ": location duplicates line " +
                                        std::to_string(lines[j]));
    d.validate();
    return d;
}

SpatialDataset parse_dataset_csv(const std::string& text) {
    std::istringstream in(text);
    return parse_dataset_csv(in);
}

SpatialDataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open dataset '" + path + "'");
    return parse_dataset_csv(in);
}

void write_dataset_csv(std::ostream& out, const SpatialDataset& data, const std::vector<std::string>& covariate_names) {
    const Eigen::Index extra = data.X.cols() - 1;
    if (!covariate_names.empty() && static_cast<Eigen::Index>(covariate_names.size()) != extra)
        throw LengthMismatch("covariate name count does not match the design");
    out << "s1,s2,y";
    for (Eigen::Index c = 0; c < extra; ++c)
        out << ',' << (covariate_names.empty() ? "x" + std::to_string(c + 1) : covariate_names[c]);
    out << '\n';
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        out << num(data.locations(i, 0)) << ',' << num(data.locations(i, 1)) << ',' << num(data.y[i]);
        for (Eigen::Index c = 0; c < extra; ++c) out << ',' << num(data.X(i, c + 1));
        out << '\n';
    }
}

std::string dataset_csv(const SpatialDataset& data) {
    std::ostringstream out;
    write_dataset_csv(out, data);
    return out.str();
}

// ----------------------------------------------------------------- chains

namespace {
constexpr std::string_view kChainMagic = "# curvwomb-chains v1";
constexpr std::string_view kMetaPrefix = "# meta ";
}  // namespace

void write_chains(std::ostream& out, const PosteriorChains& c) {
    c.validate();
    const json priors = {{"a_phi", c.priors.a_phi},   {"b_phi", c.priors.b_phi},   {"a_sigma", c.priors.a_sigma},
                         {"b_sigma", c.priors.b_sigma}, {"a_tau", c.priors.a_tau},   {"b_tau", c.priors.b_tau},
                         {"mu_beta", std::vector<double>(c.priors.mu_beta.data(), c.priors.mu_beta.data() + c.priors.mu_beta.size())},
                         {"Sigma_beta", matrix_json(c.priors.Sigma_beta)}};
    const json meta = {{"family", to_string(c.family)}, {"priors", priors},     {"seed", c.seed},
                       {"iters", c.iters},              {"burn_in", c.burn_in}, {"thin", c.thin},
                       {"locations", matrix_json(c.locations)}};
    out << kChainMagic << '\n' << kMetaPrefix << meta.dump() << '\n';
    const Eigen::Index p = c.beta.cols(), L = c.Z.cols();
    for (Eigen::Index j = 0; j < p; ++j) out << "beta" << j + 1 << ',';
    out << "sigma2,tau2,phi";
    for (Eigen::Index j = 0; j < L; ++j) out << ",Z" << j + 1;
    out << ",accept\n";
    for (Eigen::Index k = 0; k < c.n_draws(); ++k) {
        for (Eigen::Index j = 0; j < p; ++j) out << num(c.beta(k, j)) << ',';
        out << num(c.sigma2[k]) << ',' << num(c.tau2[k]) << ',' << num(c.phi[k]);
        for (Eigen::Index j = 0; j < L; ++j) out << ',' << num(c.Z(k, j));
        out << ',' << num(c.accept_rate.size() ? c.accept_rate[k] : 0.0) << '\n';
    }
}

std::string chains_text(const PosteriorChains& chains) {
    std::ostringstream out;
    write_chains(out, chains);
    return out.str();
}

PosteriorChains parse_chains(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    auto next = [&]() {
        while (std::getline(in, line)) {
            ++lineno;
            if (!blank(line)) return true;
        }
        return false;
    };
    if (!next()) throw EmptySamples("chain file is empty");
    if (trim(line) != kChainMagic) throw ParseError(lineno, "not a curvwomb chain file (missing magic line)");
    if (!next() || line.rfind(kMetaPrefix, 0) != 0) throw ParseError(lineno, "missing '# meta' record");

    PosteriorChains c;
    try {
        const json meta = json::parse(line.substr(kMetaPrefix.size()));
        c.family = kernel_family_from_string(meta.at("family").get<std::string>());
        const json& pr = meta.at("priors");
        c.priors.a_phi = pr.at("a_phi").get<double>();
        c.priors.b_phi = pr.at("b_phi").get<double>();
        c.priors.a_sigma = pr.at("a_sigma").get<double>();
        c.priors.b_sigma = pr.at("b_sigma").get<double>();
        c.priors.a_tau = pr.at("a_tau").get<double>();
        c.priors.b_tau = pr.at("b_tau").get<double>();
        const auto mu = pr.at("mu_beta").get<std::vector<double>>();
        c.priors.mu_beta = Eigen::Map<const Vec>(mu.data(), static_cast<Eigen::Index>(mu.size()));
        c.priors.Sigma_beta = json_matrix(pr.at("Sigma_beta"), static_cast<Eigen::Index>(mu.size()), "Sigma_beta");
        c.seed = meta.at("seed").get<std::uint64_t>();
        c.iters = meta.at("iters").get<int>();
        c.burn_in = meta.at("burn_in").get<int>();
        c.thin = meta.at("thin").get<int>();
        c.locations = json_matrix(meta.at("locations"), 2, "locations");
    } catch (const json::exception& e) {
        throw ParseError(lineno, std::string("bad meta record: ") + e.what());
    } catch (const ConfigError& e) {
        throw ParseError(lineno, e.what());
    }

    if (!next()) throw EmptySamples("chain file has no header row");
    const auto header = split(line);
    const auto L = c.locations.rows();
    Eigen::Index p = 0;
    while (p < static_cast<Eigen::Index>(header.size()) && header[p].rfind("beta", 0) == 0) ++p;
    if (p == 0 || static_cast<Eigen::Index>(header.size()) != p + 3 + L + 1)
        throw ParseError(lineno, "column header does not match " + std::to_string(L) + " locations");
    const std::size_t ncol = header.size();

    std::vector<std::vector<double>> rows;
    while (next()) {
        const auto fields = split(line);
        if (fields.size() != ncol)
            throw ParseError(lineno, "expected " + std::to_string(ncol) + " columns, found " + std::to_string(fields.size()));
        std::vector<double> r(ncol);
        for (std::size_t j = 0; j < ncol; ++j) r[j] = parse_number(fields[j], lineno, header[j]);
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw EmptySamples("chain file contains no retained draws");
    const auto n = static_cast<Eigen::Index>(rows.size());
    c.beta.resize(n, p);
    c.sigma2.resize(n);
    c.tau2.resize(n);
    c.phi.resize(n);
    c.Z.resize(n, L);
    c.accept_rate.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto& r = rows[k];
        for (Eigen::Index j = 0; j < p; ++j) c.beta(k, j) = r[j];
        c.sigma2[k] = r[p];
        c.tau2[k] = r[p + 1];
        c.phi[k] = r[p + 2];
        for (Eigen::Index j = 0; j < L; ++j) c.Z(k, j) = r[p + 3 + j];
        c.accept_rate[k] = r[p + 3 + L];
    }
    c.validate();
    return c;
}

PosteriorChains parse_chains(const std::string& text) {
    std::istringstream in(text);
    return parse_chains(in);
}

void save_chains(const std::string& path, const PosteriorChains& chains) { write_file_atomic(path, chains_text(chains)); }

PosteriorChains load_chains(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open chain file '" + path + "'");
    return parse_chains(in);
}

// ------------------------------------------------------------------ curve

Curve parse_curve(const std::string& text) {
    const json j = parse_json(text, "curve document");
    reject_unknown(j, {"kind", "points", "closed", "level", "resolution", "select", "orientation"}, "curve document");
    if (!j.contains("kind") || !j["kind"].is_string()) throw ConfigError("curve document needs a string 'kind'");
    Curve c;
    c.kind = curve_kind_from_string(j["kind"].get<std::string>());
    if (j.contains("points")) {
        if (!j["points"].is_array()) throw ConfigError("'points' must be a list of [x, y]");
        for (const json& p : j["points"]) c.points.push_back(json_vec2(p, "each point"));
    } else if (c.kind != CurveKind::LevelSet) {
        throw ConfigError("curve document needs 'points'");
    }
    c.closed = get_as<bool>(j, "closed", false, "curve document");
    c.level = get_as<double>(j, "level", 0.0, "curve document");
    c.resolution = get_as<int>(j, "resolution", c.resolution, "curve document");
    if (j.contains("select")) c.select = json_vec2(j["select"], "'select'");
    if (j.contains("orientation")) c.orientation = orientation_from_string(get_as<std::string>(j, "orientation", "", "curve document"));
    if (c.kind == CurveKind::LevelSet && !j.contains("level")) throw ConfigError("level curves need 'level'");
    if (c.resolution < 1) throw ConfigError("'resolution' must be positive");
    return c;
}

Curve load_curve(const std::string& path) { return parse_curve(read_file(path)); }

std::string curve_json(const Curve& c) {
    json pts = json::array();
    for (const Vec2& p : c.points) pts.push_back(vec2_json(p));
    json j = {{"kind", to_string(c.kind)},   {"points", pts},
              {"closed", c.closed},          {"level", c.level},
              {"resolution", c.resolution},  {"orientation", to_string(c.orientation)}};
    if (c.select) j["select"] = vec2_json(*c.select);
    return j.dump(2);
}

// ----------------------------------------------------------- grid summary

void write_grid_summary_csv(std::ostream& out, const GridSummary& s, const std::vector<GridField>& fields) {
    out << "x,y,field,median,lower,upper,flag\n";
    for (std::size_t f = 0; f < s.fields.size(); ++f) {
        if (!fields.empty() && std::find(fields.begin(), fields.end(), s.fields[f]) == fields.end()) continue;
        const std::string name(to_string(s.fields[f]));
        for (Eigen::Index i = 0; i < s.points.rows(); ++i) {
            const Summary& v = s.stats[f][i];
            out << num(s.points(i, 0)) << ',' << num(s.points(i, 1)) << ',' << name << ',' << num(v.median) << ','
                << num(v.lower) << ',' << num(v.upper) << ',' << to_string(v.flag) << '\n';
        }
    }
}

std::string grid_summary_csv(const GridSummary& s, const std::vector<GridField>& fields) {
    std::ostringstream out;
    write_grid_summary_csv(out, s, fields);
    return out.str();
}

GridSummary parse_grid_summary_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!blank(line)) break;
    }
    if (trim(line) != "x,y,field,median,lower,upper,flag") throw ParseError(lineno, "unexpected GridSummary header");
    GridSummary g;
    std::vector<Vec2> pts;
    while (std::getline(in, line)) {
        ++lineno;
        if (blank(line)) continue;
        const auto f = split(line);
        if (f.size() != 7) throw ParseError(lineno, "expected 7 columns");
        const GridField field = [&] {
            try {
                return grid_field_from_string(f[2]);
            } catch (const ConfigError& e) {
                throw ParseError(lineno, e.what());
            }
        }();
        auto it = std::find(g.fields.begin(), g.fields.end(), field);
        if (it == g.fields.end()) {
            g.fields.push_back(field);
            g.stats.emplace_back();
            it = g.fields.end() - 1;
        }
        const std::size_t fi = static_cast<std::size_t>(it - g.fields.begin());
        const Vec2 p(parse_number(f[0], lineno, "x"), parse_number(f[1], lineno, "y"));
        if (fi == 0) pts.push_back(p);
        Summary s;
        s.median = parse_number(f[3], lineno, "median");
        s.lower = parse_number(f[4], lineno, "lower");
        s.upper = parse_number(f[5], lineno, "upper");
        try {
            s.flag = significance_from_string(f[6]);
        } catch (const ConfigError& e) {
            throw ParseError(lineno, e.what());
        }
        g.stats[fi].push_back(s);
    }
    g.points.resize(static_cast<Eigen::Index>(pts.size()), 2);
    for (std::size_t i = 0; i < pts.size(); ++i) g.points.row(static_cast<Eigen::Index>(i)) = pts[i].transpose();
    for (const auto& st : g.stats)
        if (st.size() != pts.size()) throw LengthMismatch("GridSummary fields cover different numbers of points");
    return g;
}

// --------------------------------------------------------------- wombling

std::string womble_segments_csv(const WomblingResult& r) {
    std::ostringstream out;
    out << "segment,x0,y0,x1,y1,length,measure,median,lower,upper,flag\n";
    auto row = [&](const SegmentSummary& s, const Segment& seg, const char* name, const Summary& v) {
        out << s.index << ',' << num(seg.start[0]) << ',' << num(seg.start[1]) << ',' << num(seg.stop[0]) << ','
            << num(seg.stop[1]) << ',' << num(s.length) << ',' << name << ',' << num(v.median) << ',' << num(v.lower)
            << ',' << num(v.upper) << ',' << to_string(v.flag) << '\n';
    };
    for (const SegmentSummary& s : r.segments) {
        const Segment& seg = r.partition.segments[s.index];
        row(s, seg, "avg_gradient", s.avg_gradient);
        row(s, seg, "avg_curvature", s.avg_curvature);
        row(s, seg, "total_gradient", s.total_gradient);
        row(s, seg, "total_curvature", s.total_curvature);
    }
    return out.str();
}

std::string womble_json(const WomblingResult& r) {
    json segs = json::array();
    for (const SegmentSummary& s : r.segments) {
        const Segment& seg = r.partition.segments[s.index];
        segs.push_back({{"index", s.index},
                        {"start", vec2_json(seg.start)},
                        {"stop", vec2_json(seg.stop)},
                        {"length", s.length},
                        {"failed", s.failed},
                        {"avg_gradient", summary_json(s.avg_gradient)},
                        {"avg_curvature", summary_json(s.avg_curvature)},
                        {"total_gradient", summary_json(s.total_gradient)},
                        {"total_curvature", summary_json(s.total_curvature)}});
    }
    const json curve = {{"length", r.curve.length},
                        {"avg_gradient", summary_json(r.curve.avg_gradient)},
                        {"avg_curvature", summary_json(r.curve.avg_curvature)},
                        {"total_gradient", summary_json(r.curve.total_gradient)},
                        {"total_curvature", summary_json(r.curve.total_curvature)}};
    const json doc = {{"mode", to_string(r.mode)},
                      {"approximate", r.approximate},
                      {"prob", r.prob},
                      {"norm", r.partition.norm},
                      {"closed", r.partition.closed},
                      {"n_draws", r.total_gradient.rows()},
                      {"curve", curve},
                      {"segments", segs}};
    return doc.dump(2);
}

// ------------------------------------------------------------ run config

Mat grid_points(const GridSpec& spec, const Mat& locations) {
    if (spec.resolution < 2) throw ConfigError("grid resolution must be at least 2");
    if (locations.rows() == 0 && (!spec.lo || !spec.hi)) throw ConfigError("grid bounds need locations or explicit lo/hi");
    const Vec2 lo = spec.lo.value_or(Vec2(locations.colwise().minCoeff().transpose()));
    const Vec2 hi = spec.hi.value_or(Vec2(locations.colwise().maxCoeff().transpose()));
    if (!(hi[0] > lo[0] && hi[1] > lo[1])) throw ConfigError("grid bounds are empty");
    ScalarGrid g;
    g.xs = Vec::LinSpaced(spec.resolution, lo[0], hi[0]);
    g.ys = Vec::LinSpaced(spec.resolution, lo[1], hi[1]);
    g.values = Mat::Zero(spec.resolution, spec.resolution);
    if (spec.convex_hull) mask_outside_convex_hull(g, locations);
    std::vector<Vec2> keep;
    for (int j = 0; j < spec.resolution; ++j)
        for (int i = 0; i < spec.resolution; ++i)
            if (!std::isnan(g.values(j, i))) keep.emplace_back(g.xs[i], g.ys[j]);
    if (keep.empty()) throw ConfigError("grid contains no points");
    Mat pts(static_cast<Eigen::Index>(keep.size()), 2);
    for (std::size_t k = 0; k < keep.size(); ++k) pts.row(static_cast<Eigen::Index>(k)) = keep[k].transpose();
    return pts;
}

void RunConfig::validate() const {
    mcmc.validate();
    if (grid.resolution < 2) throw ConfigError("grid.resolution must be at least 2");
    if (grid.lo.has_value() != grid.hi.has_value()) throw ConfigError("grid.lo and grid.hi go together");
    if (n_quad_1d < 1) throw ConfigError("quadrature.n_1d must be positive");
    (void)quad_side_from_total(n_quad_2d);
    if (!(max_norm > 0.0)) throw ConfigError("wombling.max_norm must be positive");
    if (surface_resolution < 2) throw ConfigError("wombling.surface_resolution must be at least 2");
    if (draw_stride < 1) throw ConfigError("draw_stride must be at least 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (port < 0 || port > 65535) throw ConfigError("service.port out of range");
    if (max_concurrent_fits < 1) throw ConfigError("service.max_concurrent_fits must be at least 1");
    for (const std::string& c : curves)
        if (!std::filesystem::exists(c)) throw ConfigError("curve file '" + c + "' does not exist");
}

PriorConfig RunConfig::prior_config(const SpatialDataset& data) const {
    PriorConfig p = default_priors(data, priors.applications);
    if (priors.a_phi) p.a_phi = *priors.a_phi;
    if (priors.b_phi) p.b_phi = *priors.b_phi;
    if (priors.a_sigma) p.a_sigma = *priors.a_sigma;
    if (priors.b_sigma) p.b_sigma = *priors.b_sigma;
    if (priors.a_tau) p.a_tau = *priors.a_tau;
    if (priors.b_tau) p.b_tau = *priors.b_tau;
    p.validate(data.n_covariates());
    return p;
}

DifferentialSettings RunConfig::differential_settings() const {
    DifferentialSettings s;
    s.alpha = alpha;
    s.seed = mcmc.seed;
    s.draw_stride = draw_stride;
    return s;
}

WomblingSettings RunConfig::wombling_settings() const {
    WomblingSettings s;
    s.n_quad_1d = n_quad_1d;
    s.n_quad_2d = n_quad_2d;
    s.alpha = alpha;
    s.mode = mode;
    s.seed = mcmc.seed;
    s.draw_stride = draw_stride;
    return s;
}

RunConfig parse_run_config(const std::string& text) {
    const json j = parse_json(text, "run config");
    reject_unknown(j, {"kernel", "priors", "mcmc", "grid", "quadrature", "wombling", "draw_stride", "alpha", "curves", "service"},
                   "run config");
    RunConfig c;
    if (j.contains("kernel")) {
        const json& k = j["kernel"];
        reject_unknown(k, {"family", "nu"}, "kernel");
        if (k.contains("family")) c.family = kernel_family_from_string(get_as<std::string>(k, "family", "", "kernel"));
        if (k.contains("nu")) {
            const double nu = get_as<double>(k, "nu", 0.0, "kernel");
            if (c.family != KernelFamily::SquaredExponential || !k.contains("family")) {
                if (nu == 2.5) c.family = KernelFamily::Matern52;
                else if (nu == 1.5) c.family = KernelFamily::Matern32;
                else throw ConfigError("kernel.nu must be 1.5 or 2.5");
            }
        }
    }
    if (j.contains("priors")) {
        const json& p = j["priors"];
        reject_unknown(p, {"a_phi", "b_phi", "a_sigma", "b_sigma", "a_tau", "b_tau", "applications"}, "priors");
        auto opt = [&](const char* key, std::optional<double>& slot) {
            if (p.contains(key)) slot = get_as<double>(p, key, 0.0, "priors");
        };
        opt("a_phi", c.priors.a_phi);
        opt("b_phi", c.priors.b_phi);
        opt("a_sigma", c.priors.a_sigma);
        opt("b_sigma", c.priors.b_sigma);
        opt("a_tau", c.priors.a_tau);
        opt("b_tau", c.priors.b_tau);
        c.priors.applications = get_as<bool>(p, "applications", false, "priors");
    }
    if (j.contains("mcmc")) {
        const json& m = j["mcmc"];
        reject_unknown(m, {"iters", "burn_in", "thin", "seed", "target_accept"}, "mcmc");
        c.mcmc.iters = get_as<int>(m, "iters", c.mcmc.iters, "mcmc");
        if (m.contains("burn_in")) c.mcmc.burn_in = get_as<int>(m, "burn_in", 0, "mcmc");
        c.mcmc.thin = get_as<int>(m, "thin", c.mcmc.thin, "mcmc");
        c.mcmc.seed = get_as<std::uint64_t>(m, "seed", c.mcmc.seed, "mcmc");
        c.mcmc.target_accept = get_as<double>(m, "target_accept", c.mcmc.target_accept, "mcmc");
    }
    if (j.contains("grid")) {
        const json& g = j["grid"];
        reject_unknown(g, {"convex_hull", "lo", "hi", "resolution"}, "grid");
        c.grid.convex_hull = get_as<bool>(g, "convex_hull", false, "grid");
        if (g.contains("lo")) c.grid.lo = json_vec2(g["lo"], "grid.lo");
        if (g.contains("hi")) c.grid.hi = json_vec2(g["hi"], "grid.hi");
        c.grid.resolution = get_as<int>(g, "resolution", c.grid.resolution, "grid");
    }
    if (j.contains("quadrature")) {
        const json& q = j["quadrature"];
        reject_unknown(q, {"n_1d", "n_2d"}, "quadrature");
        c.n_quad_1d = get_as<int>(q, "n_1d", c.n_quad_1d, "quadrature");
        c.n_quad_2d = get_as<int>(q, "n_2d", c.n_quad_2d, "quadrature");
    }
    if (j.contains("wombling")) {
        const json& w = j["wombling"];
        reject_unknown(w, {"max_norm", "mode", "surface_resolution"}, "wombling");
        c.max_norm = get_as<double>(w, "max_norm", c.max_norm, "wombling");
        if (w.contains("mode")) c.mode = womb_mode_from_string(get_as<std::string>(w, "mode", "", "wombling"));
        c.surface_resolution = get_as<int>(w, "surface_resolution", c.surface_resolution, "wombling");
    }
    c.draw_stride = get_as<int>(j, "draw_stride", c.draw_stride, "run config");
    c.alpha = get_as<double>(j, "alpha", c.alpha, "run config");
    c.curves = get_as<std::vector<std::string>>(j, "curves", {}, "run config");
    if (j.contains("service")) {
        const json& s = j["service"];
        reject_unknown(s, {"host", "port", "data_dir", "max_concurrent_fits"}, "service");
        c.host = get_as<std::string>(s, "host", c.host, "service");
        c.port = get_as<int>(s, "port", c.port, "service");
        c.data_dir = get_as<std::string>(s, "data_dir", c.data_dir, "service");
        c.max_concurrent_fits = get_as<int>(s, "max_concurrent_fits", c.max_concurrent_fits, "service");
    }
    return c;
}

RunConfig load_run_config(const std::string& path) { return parse_run_config(read_file(path)); }

std::string run_config_json(const RunConfig& c) {
    json priors = {{"applications", c.priors.applications}};
    auto put = [&](const char* key, const std::optional<double>& v) {
        if (v) priors[key] = *v;
    };
    put("a_phi", c.priors.a_phi);
    put("b_phi", c.priors.b_phi);
    put("a_sigma", c.priors.a_sigma);
    put("b_sigma", c.priors.b_sigma);
    put("a_tau", c.priors.a_tau);
    put("b_tau", c.priors.b_tau);
    json mcmc = {{"iters", c.mcmc.iters}, {"thin", c.mcmc.thin}, {"seed", c.mcmc.seed}, {"target_accept", c.mcmc.target_accept}};
    if (c.mcmc.burn_in) mcmc["burn_in"] = *c.mcmc.burn_in;
    json grid = {{"convex_hull", c.grid.convex_hull}, {"resolution", c.grid.resolution}};
    if (c.grid.lo) grid["lo"] = vec2_json(*c.grid.lo);
    if (c.grid.hi) grid["hi"] = vec2_json(*c.grid.hi);
    const json doc = {
        {"kernel", {{"family", to_string(c.family)}}},
        {"priors", priors},
        {"mcmc", mcmc},
        {"grid", grid},
        {"quadrature", {{"n_1d", c.n_quad_1d}, {"n_2d", c.n_quad_2d}}},
        {"wombling", {{"max_norm", c.max_norm}, {"mode", to_string(c.mode)}, {"surface_resolution", c.surface_resolution}}},
        {"draw_stride", c.draw_stride},
        {"alpha", c.alpha},
        {"curves", c.curves},
        {"service", {{"host", c.host}, {"port", c.port}, {"data_dir", c.data_dir}, {"max_concurrent_fits", c.max_concurrent_fits}}},
    };
    return doc.dump(2);
}

// ------------------------------------------------------------------ files

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& contents) {
    const std::filesystem::path target(path);
    if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write '" + tmp + "'");
        out << contents;
        if (!out) throw ConfigError("write to '" + tmp + "' failed");
    }
    std::filesystem::rename(tmp, target);
}

}  // namespace curvwomb::io
