#include "ousynth/model_io.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "ousynth/errors.hpp"
#include "ousynth/version.hpp"

namespace ousynth {

using nlohmann::json;

namespace {

json to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

json to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

const json& field(const json& j, const char* name) {
    auto it = j.find(name);
    if (it == j.end()) throw SchemaError(std::string("missing field '") + name + "'");
    return *it;
}

Eigen::MatrixXd matrix_from(const json& j, const char* name) {
    const json& rows = field(j, name);
    if (!rows.is_array() || rows.empty())
        throw SchemaError(std::string("field '") + name + "' must be a non-empty array of rows");
    const size_t cols = rows[0].is_array() ? rows[0].size() : 0;
    if (cols == 0) throw SchemaError(std::string("field '") + name + "' has an empty row");
    Eigen::MatrixXd m(rows.size(), cols);
    for (size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i].is_array() || rows[i].size() != cols)
            throw SchemaError(std::string("field '") + name + "' is ragged at row " +
                              std::to_string(i));
        for (size_t j = 0; j < cols; ++j) {
            if (!rows[i][j].is_number())
                throw SchemaError(std::string("corrupted numeric cell in '") + name + "'");
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j].get<double>();
        }
    }
    return m;
}

Eigen::VectorXd vector_from(const json& j, const char* name) {
    const json& arr = field(j, name);
    if (!arr.is_array()) throw SchemaError(std::string("field '") + name + "' must be an array");
    Eigen::VectorXd v(arr.size());
    for (size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_number())
            throw SchemaError(std::string("corrupted numeric cell in '") + name + "'");
        v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
    }
    return v;
}

void check_schema_version(const json& j, const char* kind) {
    const json& v = field(j, "schema_version");
    if (!v.is_number_integer())
        throw SchemaError("schema_version must be an integer");
    if (v.get<int>() != kSchemaVersion)
        throw SchemaError(std::string(kind) + ": schema_version " + v.dump() +
                          " not supported (this build reads version " +
                          std::to_string(kSchemaVersion) + ")");
    if (field(j, "kind").get<std::string>() != kind)
        throw SchemaError(std::string("expected kind '") + kind + "'");
}

json parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ParseError("'" + path.string() + "' is not valid JSON");
    return j;
}

}  // namespace

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
        out << text;
        if (!out.flush()) throw IoError("write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

void save_market_model(const MarketModel& model, const std::filesystem::path& path) {
    check_market_model(model);
    json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = "market_model";
    j["dim"] = model.dim();
    j["column_ids"] = model.column_ids;
    j["market_column"] = model.market_column;
    j["anchor"] = model.anchor;
    j["a_matrix"] = to_json(model.ou.a_matrix);
    j["mu"] = to_json(model.ou.mu);
    j["gamma"] = to_json(model.ou.gamma);
    j["sigma"] = to_json(model.ou.sigma);
    j["x0"] = to_json(model.x0);
    write_text_atomic(path, j.dump(2) + "\n");
}

MarketModel load_market_model(const std::filesystem::path& path) {
    const json j = parse_file(path);
    check_schema_version(j, "market_model");

    MarketModel model;
    model.ou.a_matrix = matrix_from(j, "a_matrix");
    model.ou.mu = vector_from(j, "mu");
    model.ou.gamma = vector_from(j, "gamma");
    model.ou.sigma = matrix_from(j, "sigma");
    model.market_column = field(j, "market_column").get<int>();
    model.column_ids = field(j, "column_ids").get<std::vector<std::string>>();
    model.anchor = field(j, "anchor").get<double>();
    model.x0 = vector_from(j, "x0");

    const int dim = field(j, "dim").get<int>();
    if (dim != model.dim())
        throw SchemaError("'" + path.string() + "': dim field disagrees with parameter shapes");
    try {
        check_market_model(model);  // sigma symmetry/PSD and dimension invariants
    } catch (const Error& e) {
        throw SchemaError("'" + path.string() + "': invariant violation on load: " + e.what());
    }
    return model;
}

void save_apt_model(const AptModelFile& model, const std::filesystem::path& path) {
    json stocks = json::array();
    for (const auto& c : model.stocks) {
        json s;
        s["id"] = c.stock_id;
        s["alpha"] = c.alpha;
        s["betas"] = to_json(c.betas);
        s["resid_sigma"] = c.resid_sigma;
        s["r_squared"] = c.r_squared;
        s["residuals"] = to_json(c.residuals);
        stocks.push_back(std::move(s));
    }
    json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = "apt_coefficients";
    j["factor_ids"] = model.factor_ids;
    j["stocks"] = std::move(stocks);
    write_text_atomic(path, j.dump(2) + "\n");
}

AptModelFile load_apt_model(const std::filesystem::path& path) {
    const json j = parse_file(path);
    check_schema_version(j, "apt_coefficients");

    AptModelFile model;
    model.factor_ids = field(j, "factor_ids").get<std::vector<std::string>>();
    const size_t k = model.factor_ids.size();
    for (const json& s : field(j, "stocks")) {
        AptCoefficients c;
        c.stock_id = field(s, "id").get<std::string>();
        c.alpha = field(s, "alpha").get<double>();
        c.betas = vector_from(s, "betas");
        c.resid_sigma = field(s, "resid_sigma").get<double>();
        c.r_squared = field(s, "r_squared").get<double>();
        c.residuals = vector_from(s, "residuals");
        if (static_cast<size_t>(c.betas.size()) != k)
            throw SchemaError("'" + path.string() + "': stock '" + c.stock_id + "' has " +
                              std::to_string(c.betas.size()) + " betas for " + std::to_string(k) +
                              " factors");
        if (c.resid_sigma < 0.0)
            throw SchemaError("'" + path.string() + "': stock '" + c.stock_id +
                              "' has negative resid_sigma");
        model.stocks.push_back(std::move(c));
    }
    return model;
}

uint64_t fnv1a64(const void* data, size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    uint64_t hash = 0xCBF29CE484222325ULL;
    for (size_t i = 0; i < size; ++i) {
        hash ^= bytes[i];
        hash *= 0x00000100000001B3ULL;
    }
    return hash;
}

uint64_t fnv1a64_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for hashing");
    uint64_t hash = 0xCBF29CE484222325ULL;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 0x00000100000001B3ULL;
        }
    }
    return hash;
}

void write_manifest(RunManifest manifest, const std::filesystem::path& path) {
    if (manifest.created_utc.empty()) {
        const auto now = std::chrono::system_clock::now();
        const std::time_t tt = std::chrono::system_clock::to_time_t(now);
        std::tm tm{};
        gmtime_r(&tt, &tm);
        char buf[64];
        std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                      tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
        manifest.created_utc = buf;
    }
    if (manifest.tool_version.empty()) manifest.tool_version = kVersion;

    json inputs = json::array();
    for (const auto& [file, hash] : manifest.inputs) {
        char hex[24];
        std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(hash));
        inputs.push_back({{"path", file}, {"fnv1a64", hex}});
    }
    json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = "run_manifest";
    j["command"] = manifest.command;
    j["seed"] = manifest.seed;
    j["steps"] = manifest.steps;
    j["traces"] = manifest.traces;
    if (!manifest.noise_mode.empty()) j["noise"] = manifest.noise_mode;
    j["inputs"] = std::move(inputs);
    j["created_utc"] = manifest.created_utc;
    j["tool_version"] = manifest.tool_version;
    write_text_atomic(path, j.dump(2) + "\n");
}

}  // namespace ousynth
