#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "clustering.hpp"
#include "confmat.hpp"
#include "ordering.hpp"
#include "predops.hpp"

namespace convlens {

using json = nlohmann::json;

namespace detail {

inline bool numeric_field(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        // trim surrounding whitespace
        const auto b = field.find_first_not_of(" \t\r");
        const auto e = field.find_last_not_of(" \t\r");
        fields.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

} // namespace detail

/// Confusion-matrix CSV. If the first field of the first row is non-numeric,
/// that row names the classes (applied to rows in the same order); otherwise
/// labels default to "0".."K-1".
inline ConfusionMatrix read_confusion_csv(std::istream& in) {
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        const auto fields = detail::split_csv_line(line);
        if (fields.empty() || (fields.size() == 1 && fields[0].empty())) continue;
        rows.push_back(fields);
    }
    if (rows.empty()) throw std::invalid_argument("empty confusion CSV");

    std::vector<std::string> labels;
    std::size_t first_data = 0;
    if (!detail::numeric_field(rows[0][0])) {
        labels = rows[0];
        first_data = 1;
    }
    const std::size_t k = rows.size() - first_data;
    if (labels.empty())
        for (std::size_t i = 0; i < k; ++i) labels.push_back(std::to_string(i));
    if (labels.size() != k)
        throw std::invalid_argument("label header length does not match row count");

    std::vector<std::vector<std::uint64_t>> cells;
    for (std::size_t r = first_data; r < rows.size(); ++r) {
        std::vector<std::uint64_t> row;
        for (const std::string& f : rows[r]) {
            if (!detail::numeric_field(f))
                throw std::invalid_argument("non-numeric cell '" + f + "'");
            row.push_back(std::stoull(f));
        }
        cells.push_back(std::move(row));
    }
    return ConfusionMatrix(std::move(labels), std::move(cells));
}

inline ConfusionMatrix read_confusion_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open '" + path + "'");
    return read_confusion_csv(in);
}

inline void write_confusion_csv(std::ostream& out, const ConfusionMatrix& c,
                                bool header = true) {
    if (header) {
        for (std::size_t j = 0; j < c.size(); ++j)
            out << (j ? "," : "") << c.labels()[j];
        out << '\n';
    }
    for (std::size_t i = 0; i < c.size(); ++i) {
        for (std::size_t j = 0; j < c.size(); ++j) out << (j ? "," : "") << c.at(i, j);
        out << '\n';
    }
}

// --- JSON forms ------------------------------------------------------------

inline json to_json(const ConfusionMatrix& c) {
    return json{{"labels", c.labels()}, {"matrix", c.cells()}};
}

inline ConfusionMatrix confusion_from_json(const json& j) {
    return ConfusionMatrix(j.at("labels").get<std::vector<std::string>>(),
                           j.at("matrix").get<std::vector<std::vector<std::uint64_t>>>());
}

inline json to_json(const MetricsReport& m) {
    return json{{"accuracy", m.accuracy},
                {"mean_accuracy", m.mean_accuracy},
                {"sensitivity", m.sensitivity},
                {"confusability", m.confusability},
                {"skew_flag", m.skew_flag},
                {"epsilon", m.epsilon}};
}

inline json to_json(const OrderingResult& r) {
    json j{{"order", r.permutation},
           {"objective", r.objective},
           {"initial_objective", r.initial_objective}};
    if (r.trace) j["trace"] = *r.trace;
    return j;
}

inline Permutation order_from_json(const json& j) {
    return j.at("order").get<Permutation>();
}

inline json to_json(const Clustering& c) { return json(c.groups); }

inline Clustering clustering_from_json(const json& j) {
    return Clustering{j.get<std::vector<std::vector<std::string>>>()};
}

/// Tensor container: an array of {"name", "shape", "values"} objects with
/// flat row-major values. One file may hold many named tensors.
struct NamedTensor {
    std::string name;
    std::vector<std::size_t> shape;
    std::vector<double> values;

    std::size_t element_count() const {
        std::size_t n = 1;
        for (std::size_t s : shape) n *= s;
        return n;
    }
};

inline std::vector<NamedTensor> read_tensors(const json& j) {
    std::vector<NamedTensor> out;
    for (const json& item : j) {
        NamedTensor t;
        t.name = item.at("name").get<std::string>();
        t.shape = item.at("shape").get<std::vector<std::size_t>>();
        t.values = item.at("values").get<std::vector<double>>();
        if (t.shape.empty()) throw std::invalid_argument("tensor '" + t.name + "' has no shape");
        if (t.values.size() != t.element_count())
            throw std::invalid_argument("tensor '" + t.name + "' value count mismatch");
        out.push_back(std::move(t));
    }
    return out;
}

inline std::vector<NamedTensor> read_tensors_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open '" + path + "'");
    json j;
    in >> j;
    return read_tensors(j);
}

inline json to_json(const std::vector<NamedTensor>& tensors) {
    json j = json::array();
    for (const NamedTensor& t : tensors)
        j.push_back(json{{"name", t.name}, {"shape", t.shape}, {"values", t.values}});
    return j;
}

/// FilterTensor view of a named tensor with shape (width, height, depth);
/// 2-d shapes get depth 1.
inline FilterTensor as_filter(const NamedTensor& t) {
    if (t.shape.size() != 2 && t.shape.size() != 3)
        throw std::invalid_argument("tensor '" + t.name + "' is not a 2-d or 3-d filter");
    FilterTensor f;
    f.width = t.shape[0];
    f.height = t.shape[1];
    f.depth = t.shape.size() == 3 ? t.shape[2] : 1;
    f.values = t.values;
    f.validate();
    return f;
}

/// Prediction CSV: one row per sample, K comma-separated probabilities.
inline PredictionSet read_prediction_csv(std::istream& in) {
    PredictionSet out;
    std::string line;
    while (std::getline(in, line)) {
        const auto fields = detail::split_csv_line(line);
        if (fields.empty() || (fields.size() == 1 && fields[0].empty())) continue;
        std::vector<double> row;
        for (const std::string& f : fields) {
            try {
                row.push_back(std::stod(f));
            } catch (const std::exception&) {
                throw std::invalid_argument("non-numeric prediction '" + f + "'");
            }
        }
        out.rows.push_back(std::move(row));
    }
    out.validate();
    return out;
}

inline PredictionSet read_prediction_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open '" + path + "'");
    return read_prediction_csv(in);
}

inline void write_prediction_csv(std::ostream& out, const PredictionSet& p) {
    std::ostringstream buf;
    buf.precision(17);
    for (const auto& row : p.rows) {
        for (std::size_t j = 0; j < row.size(); ++j) buf << (j ? "," : "") << row[j];
        buf << '\n';
    }
    out << buf.str();
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace convlens
