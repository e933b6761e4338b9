#include "lsngc/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lsngc/errors.hpp"

namespace lsngc {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& token, std::size_t line_no) {
    const std::string t = trim(token);
    std::size_t consumed = 0;
    double value = 0.0;
    try {
        value = std::stod(t, &consumed);
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) + ": cannot parse '" + t +
                         "' as a number");
    }
    if (consumed != t.size())
        throw ParseError("line " + std::to_string(line_no) + ": trailing junk in '" + t + "'");
    return value;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) {
            const double v = m(i, j);
            if (std::isnan(v))
                row.push_back(nullptr);
            else
                row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const nlohmann::json& rows, const std::string& key) {
    if (!rows.is_array() || rows.empty())
        throw ParseError("affinity json: '" + key + "' must be a non-empty array of rows");
    const std::size_t n = rows.size();
    Matrix m(n, rows.front().size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto& row = rows[i];
        if (!row.is_array() || row.size() != m.cols())
            throw ParseError("affinity json: ragged rows in '" + key + "'");
        for (std::size_t j = 0; j < row.size(); ++j)
            m(i, j) = row[j].is_null() ? kDiagonalSentinel : row[j].get<double>();
    }
    return m;
}

std::string sibling_csv_path(const std::string& path) {
    const auto dot = path.rfind(".json");
    if (dot != std::string::npos && dot == path.size() - 5) return path.substr(0, dot) + ".csv";
    return path + ".csv";
}

} // namespace

TimeSeriesEnsemble read_ensemble(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");

    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> names;
    std::vector<std::vector<double>> rows; // one vector per time point

    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (names.empty()) {
            for (auto& f : fields) names.push_back(trim(f));
            continue;
        }
        if (fields.size() != names.size())
            throw RaggedRows("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(names.size()) + " columns, got " +
                             std::to_string(fields.size()));
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields) row.push_back(parse_number(f, line_no));
        rows.push_back(std::move(row));
    }
    if (names.empty()) throw TooShort("'" + path + "' is empty");
    if (rows.size() < 2)
        throw TooShort("'" + path + "' has " + std::to_string(rows.size()) +
                       " time points, need at least 2");

    TimeSeriesEnsemble ensemble;
    ensemble.series_names = names;
    ensemble.data = Matrix(names.size(), rows.size());
    for (std::size_t t = 0; t < rows.size(); ++t)
        for (std::size_t s = 0; s < names.size(); ++s) ensemble.data(s, t) = rows[t][s];
    ensemble.normalized = false;
    validate_ensemble(ensemble);
    return ensemble;
}

void write_ensemble(const TimeSeriesEnsemble& ensemble, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    for (std::size_t s = 0; s < ensemble.n_series(); ++s) {
        if (s) out << ',';
        out << ensemble.series_names[s];
    }
    out << '\n';
    for (std::size_t t = 0; t < ensemble.n_points(); ++t) {
        for (std::size_t s = 0; s < ensemble.n_series(); ++s) {
            if (s) out << ',';
            out << format_double(ensemble.data(s, t));
        }
        out << '\n';
    }
    if (!out) throw IoError("write to '" + path + "' failed");
}

void write_affinity(const AffinityMatrix& matrix, const std::string& path,
                    const std::vector<std::string>& series_names, const std::string& method) {
    nlohmann::json doc;
    doc["n"] = matrix.size();
    doc["method"] = method;
    doc["series_names"] = series_names;
    doc["f_stat"] = matrix_to_json(matrix.f_stat);
    doc["p_value"] = matrix_to_json(matrix.p_value);
    doc["significant"] = matrix_to_json(matrix.significant);
    doc["clamped_count"] = matrix.clamped_count;

    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("write to '" + path + "' failed");

    std::ofstream csv(sibling_csv_path(path));
    if (!csv) throw IoError("cannot open '" + sibling_csv_path(path) + "' for writing");
    for (std::size_t i = 0; i < matrix.size(); ++i) {
        for (std::size_t j = 0; j < matrix.size(); ++j) {
            if (j) csv << ',';
            csv << format_double(matrix.f_stat(i, j));
        }
        csv << '\n';
    }
    if (!csv) throw IoError("write to '" + sibling_csv_path(path) + "' failed");
}

AffinityFile read_affinity(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("'" + path + "': " + e.what());
    }
    AffinityFile file;
    file.matrix.f_stat = matrix_from_json(doc.at("f_stat"), "f_stat");
    file.matrix.p_value = matrix_from_json(doc.at("p_value"), "p_value");
    file.matrix.significant = matrix_from_json(doc.at("significant"), "significant");
    file.matrix.clamped_count = doc.value("clamped_count", 0);
    file.method = doc.value("method", "lsngc");
    if (doc.contains("series_names"))
        file.series_names = doc["series_names"].get<std::vector<std::string>>();
    return file;
}

void write_adjacency(const AdjacencyMatrix& truth, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    for (std::size_t i = 0; i < truth.size(); ++i) {
        for (std::size_t j = 0; j < truth.size(); ++j) {
            if (j) out << ',';
            out << static_cast<int>(truth.edges(i, j));
        }
        out << '\n';
    }
    if (!out) throw IoError("write to '" + path + "' failed");
}

AdjacencyMatrix read_adjacency(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line);
        std::vector<double> row;
        for (const auto& f : fields) row.push_back(parse_number(f, line_no));
        if (!rows.empty() && row.size() != rows.front().size())
            throw RaggedRows("line " + std::to_string(line_no) + ": ragged adjacency row");
        rows.push_back(std::move(row));
    }
    if (rows.empty() || rows.size() != rows.front().size())
        throw ParseError("'" + path + "': adjacency matrix must be square and non-empty");
    AdjacencyMatrix truth;
    truth.edges = Matrix(rows.size(), rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows.size(); ++j) {
            if (rows[i][j] != 0.0 && rows[i][j] != 1.0)
                throw ParseError("'" + path + "': adjacency entries must be 0 or 1");
            truth.edges(i, j) = rows[i][j];
        }
    return truth;
}

} // namespace lsngc
