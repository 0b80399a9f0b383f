#include "cii/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace cii {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

nlohmann::json pbox_to_json(const PBox& box) {
    return nlohmann::json{{"lower_breakpoints", box.lower.breakpoints()},
                          {"lower_levels", box.lower.levels()},
                          {"upper_breakpoints", box.upper.breakpoints()},
                          {"upper_levels", box.upper.levels()}};
}

PBox pbox_from_json(const nlohmann::json& j) {
    for (const char* key : {"lower_breakpoints", "lower_levels", "upper_breakpoints",
                            "upper_levels"}) {
        if (!j.contains(key) || !j.at(key).is_array()) {
            throw std::invalid_argument(std::string("p-box record missing array field ") +
                                        key);
        }
    }
    StepCdf lower(j.at("lower_breakpoints").get<std::vector<double>>(),
                  j.at("lower_levels").get<std::vector<double>>());
    StepCdf upper(j.at("upper_breakpoints").get<std::vector<double>>(),
                  j.at("upper_levels").get<std::vector<double>>());
    return PBox(std::move(lower), std::move(upper));
}

void write_pbox_file(const std::string& path, const std::map<std::size_t, PBox>& by_row) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const auto& [idx, box] : by_row) {
        nlohmann::json j = pbox_to_json(box);
        j["index"] = idx;
        out << j.dump() << '\n';
    }
}

namespace {

nlohmann::json vec_to_json(const Eigen::VectorXd& v) {
    std::vector<double> out(v.data(), v.data() + v.size());
    return nlohmann::json(out);
}

Eigen::VectorXd vec_from_json(const nlohmann::json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                             static_cast<Eigen::Index>(v.size()));
}

nlohmann::json mat_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        rows.push_back(vec_to_json(m.row(i).transpose()));
    }
    return rows;
}

Eigen::MatrixXd mat_from_json(const nlohmann::json& j) {
    const auto rows = j.get<std::vector<std::vector<double>>>();
    if (rows.empty()) throw std::invalid_argument("empty matrix");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.front().size()) {
            throw std::invalid_argument("ragged matrix rows");
        }
        for (std::size_t k = 0; k < rows[i].size(); ++k) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
        }
    }
    return m;
}

nlohmann::json hetero_to_json(const HeteroscedasticLeastSquares& h) {
    return nlohmann::json{{"degree", h.feature_degree()},
                          {"dim", h.feature_dim()},
                          {"beta_mean", vec_to_json(h.mean_coeffs())},
                          {"beta_logvar", vec_to_json(h.logvar_coeffs())},
                          {"var_floor", h.variance_floor()},
                          {"var_cap", h.variance_cap()}};
}

std::shared_ptr<HeteroscedasticLeastSquares> hetero_from_json(const nlohmann::json& j) {
    return HeteroscedasticLeastSquares::restore(
        j.at("degree").get<int>(), j.at("dim").get<Eigen::Index>(),
        vec_from_json(j.at("beta_mean")), vec_from_json(j.at("beta_logvar")),
        j.at("var_floor").get<double>(), j.at("var_cap").get<double>());
}

}  // namespace

nlohmann::json model_to_json(const CiiModel& m) {
    nlohmann::json j;
    j["distance"] = {
        {"kind", m.distance.kind() == MetricKind::Mahalanobis ? "mahalanobis"
                                                              : "euclidean"},
        {"col_shift", vec_to_json(m.distance.column_shift())},
        {"col_scale", vec_to_json(m.distance.column_scale())},
        {"mean", vec_to_json(m.distance.mean())},
        {"covariance_factor", mat_to_json(m.distance.covariance_factor())},
        {"r0", m.distance.r0()}};
    j["band"] = {{"degree", m.ipm.degree()},
                 {"coeffs_upper", m.ipm.coeffs_upper()},
                 {"coeffs_lower", m.ipm.coeffs_lower()},
                 {"r_min", m.ipm.r_min()},
                 {"r_max", m.ipm.r_max()}};
    if (m.constraints.support) {
        j["support"] = {{"lo", m.constraints.support->lo},
                        {"hi", m.constraints.support->hi}};
    } else {
        j["support"] = nullptr;
    }
    j["query_grid_points"] = m.query_grid_points;
    nlohmann::json cal = nlohmann::json::array();
    for (const auto& rec : m.calibration) {
        cal.push_back({{"index", rec.index}, {"r", rec.r}, {"d", rec.d}});
    }
    j["calibration"] = cal;

    if (!m.base) throw std::invalid_argument("model has no base predictor");
    const std::string kind = m.base->kind();
    nlohmann::json base{{"kind", kind}};
    if (kind == "hetero_ls") {
        base["params"] =
            hetero_to_json(dynamic_cast<const HeteroscedasticLeastSquares&>(*m.base));
    } else if (kind == "bootstrap_envelope") {
        nlohmann::json members = nlohmann::json::array();
        const auto& env = dynamic_cast<const BootstrapEnsembleEnvelope&>(*m.base);
        for (const auto& mem : env.members()) members.push_back(hetero_to_json(*mem));
        base["members"] = members;
    } else {
        throw std::invalid_argument("base predictor kind '" + kind +
                                    "' cannot be embedded in a model file");
    }
    j["base"] = base;
    return j;
}

CiiModel model_from_json(const nlohmann::json& j) {
    CiiModel m;
    const nlohmann::json& dj = j.at("distance");
    const std::string kind_name = dj.at("kind").get<std::string>();
    if (kind_name != "mahalanobis" && kind_name != "euclidean") {
        throw std::invalid_argument("unknown distance kind '" + kind_name + "'");
    }
    m.distance = DistanceModel::restore(
        kind_name == "mahalanobis" ? MetricKind::Mahalanobis : MetricKind::Euclidean,
        vec_from_json(dj.at("col_shift")), vec_from_json(dj.at("col_scale")),
        vec_from_json(dj.at("mean")), mat_from_json(dj.at("covariance_factor")),
        dj.at("r0").get<double>());

    const nlohmann::json& bj = j.at("band");
    m.ipm = IntervalPredictor(bj.at("degree").get<int>(),
                              bj.at("coeffs_upper").get<std::vector<double>>(),
                              bj.at("coeffs_lower").get<std::vector<double>>(),
                              bj.at("r_min").get<double>(), bj.at("r_max").get<double>());

    if (j.contains("support") && !j.at("support").is_null()) {
        m.constraints.support = Interval(j.at("support").at("lo").get<double>(),
                                         j.at("support").at("hi").get<double>());
    }
    m.query_grid_points = j.value("query_grid_points", 128);
    for (const auto& rec : j.value("calibration", nlohmann::json::array())) {
        m.calibration.push_back(CalibrationRecord{rec.at("index").get<std::size_t>(),
                                                  rec.at("r").get<double>(),
                                                  rec.at("d").get<double>()});
    }

    const nlohmann::json& base = j.at("base");
    const std::string base_kind = base.at("kind").get<std::string>();
    if (base_kind == "hetero_ls") {
        m.base = hetero_from_json(base.at("params"));
    } else if (base_kind == "bootstrap_envelope") {
        std::vector<std::shared_ptr<HeteroscedasticLeastSquares>> members;
        for (const auto& mem : base.at("members")) members.push_back(hetero_from_json(mem));
        m.base = BootstrapEnsembleEnvelope::restore(std::move(members));
    } else {
        throw std::invalid_argument("unknown base predictor kind '" + base_kind + "'");
    }
    return m;
}

void write_model_file(const std::string& path, const CiiModel& m) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << model_to_json(m).dump(2) << '\n';
}

CiiModel read_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument("malformed model file " + path + ": " + e.what());
    }
    return model_from_json(j);
}

std::map<std::size_t, PBox> read_pbox_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::map<std::size_t, PBox> by_row;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            ++lineno;
            continue;
        }
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw std::invalid_argument("malformed p-box record on line " +
                                        std::to_string(lineno + 1) + ": " + e.what());
        }
        std::size_t idx = j.value("index", lineno);
        try {
            by_row.emplace(idx, pbox_from_json(j));
        } catch (const std::exception& e) {
            throw std::invalid_argument("invalid p-box on line " +
                                        std::to_string(lineno + 1) + ": " + e.what());
        }
        ++lineno;
    }
    return by_row;
}

}  // namespace cii
