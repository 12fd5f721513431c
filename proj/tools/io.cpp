#include "io.hpp"

#include <fstream>

#include <fmt/format.h>

namespace gwlimit::cli {

nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

Pgf pgf_from_json(const nlohmann::json& doc) {
    try {
        const std::string type = doc.at("type").get<std::string>();
        if (type == "polynomial") return Pgf::polynomial(doc.at("p").get<std::vector<double>>());
        if (type == "linear_fractional") return Pgf::linear_fractional(doc.at("b").get<double>(), doc.at("c").get<double>());
        throw InputError("unknown pgf type '" + type + "'");
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("bad pgf JSON: ") + e.what());
    }
}

nlohmann::json pgf_to_json(const Pgf& pgf) {
    if (pgf.is_polynomial()) return {{"type", "polynomial"}, {"p", pgf.as_polynomial().p}};
    const auto lf = pgf.as_linear_fractional();
    return {{"type", "linear_fractional"}, {"b", lf.b}, {"c", lf.c}};
}

DensityModel model_from_json(const nlohmann::json& doc) {
    try {
        DensityModel model{doc.at("q").get<double>(), doc.at("alpha").get<double>(), doc.at("beta").get<double>(),
                           doc.at("coeffs").get<std::vector<double>>()};
        if (!(model.alpha > -1.0) || !(model.beta > 0.0) || !(model.q >= 0.0 && model.q < 1.0) || model.coeffs.empty())
            throw InputError("density model out of range (need alpha > -1, beta > 0, 0 <= q < 1, coeffs)");
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("bad model JSON: ") + e.what());
    }
}

nlohmann::json model_to_json(const DensityModel& model) {
    return {{"q", model.q}, {"alpha", model.alpha}, {"beta", model.beta}, {"coeffs", model.coeffs}};
}

std::string format_double(double x) { return fmt::format("{}", x); }

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    out << '\n';
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << format_double(columns[c][r]);
        out << '\n';
    }
}

}  // namespace gwlimit::cli
