#include "petrosem/operator_io.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace petrosem {

namespace {

using nlohmann::json;

int require_int(const json& j, const char* field) {
    if (!j.contains(field) || !j[field].is_number_integer())
        throw InputError(std::string("operator document: missing or non-integer "
                                     "field \"") + field + "\"");
    return j[field].get<int>();
}

std::complex<double> parse_entry(const json& e, const std::string& where) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
        throw InputError("operator document: " + where +
                         " must be a [re, im] pair");
    return {e[0].get<double>(), e[1].get<double>()};
}

}  // namespace

OperatorSpec parse_operator_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& err) {
        throw InputError(std::string("operator document: ") + err.what());
    }
    if (!doc.is_object())
        throw InputError("operator document: top level must be an object");

    int m = require_int(doc, "m");
    int n = require_int(doc, "n");
    int d = require_int(doc, "d");
    if (m < 1) throw InputError("operator document: \"m\" must be >= 1");
    if (n < 1) throw InputError("operator document: \"n\" must be >= 1");
    if (d < 0) throw InputError("operator document: \"d\" must be >= 0");
    if (!doc.contains("terms") || !doc["terms"].is_array())
        throw InputError("operator document: missing array field \"terms\"");

    std::map<MultiIndex, ComplexMatrix> terms;
    int idx = 0;
    for (const json& term : doc["terms"]) {
        std::string where = "terms[" + std::to_string(idx) + "]";
        if (!term.is_object() || !term.contains("alpha") ||
            !term.contains("matrix"))
            throw InputError("operator document: " + where +
                             " must have \"alpha\" and \"matrix\"");
        const json& ja = term["alpha"];
        if (!ja.is_array() || int(ja.size()) != n)
            throw InputError("operator document: " + where + ".alpha must have " +
                             std::to_string(n) + " entries");
        std::vector<int> entries;
        for (const json& v : ja) {
            if (!v.is_number_integer() || v.get<int>() < 0)
                throw InputError("operator document: " + where +
                                 ".alpha entries must be non-negative integers");
            entries.push_back(v.get<int>());
        }
        MultiIndex alpha(std::move(entries));

        const json& jm = term["matrix"];
        if (!jm.is_array() || int(jm.size()) != m)
            throw InputError("operator document: " + where + ".matrix must have " +
                             std::to_string(m) + " rows");
        ComplexMatrix A(m, m);
        for (int r = 0; r < m; ++r) {
            if (!jm[r].is_array() || int(jm[r].size()) != m)
                throw InputError("operator document: " + where + ".matrix row " +
                                 std::to_string(r) + " must have " +
                                 std::to_string(m) + " entries");
            for (int c = 0; c < m; ++c)
                A(r, c) = parse_entry(jm[r][c],
                                      where + ".matrix[" + std::to_string(r) +
                                          "][" + std::to_string(c) + "]");
        }
        if (terms.count(alpha))
            throw InputError("operator document: " + where +
                             " repeats an alpha already present");
        terms.emplace(std::move(alpha), std::move(A));
        ++idx;
    }
    return OperatorSpec(m, n, d, std::move(terms));
}

OperatorSpec load_operator_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open operator file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_operator_json(buf.str());
}

std::string operator_to_json(const OperatorSpec& op) {
    json doc;
    doc["m"] = op.m();
    doc["n"] = op.n();
    doc["d"] = op.d();
    doc["terms"] = json::array();
    for (const auto& [alpha, A] : op.terms()) {
        json term;
        term["alpha"] = alpha.entries();
        json rows = json::array();
        for (int r = 0; r < op.m(); ++r) {
            json row = json::array();
            for (int c = 0; c < op.m(); ++c)
                row.push_back(json::array({A(r, c).real(), A(r, c).imag()}));
            rows.push_back(std::move(row));
        }
        term["matrix"] = std::move(rows);
        doc["terms"].push_back(std::move(term));
    }
    return doc.dump(2);
}

std::string format_float(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace petrosem
