#include "fsmpc/json_io.hpp"

#include <cmath>
#include <limits>

namespace fsmpc {

using nlohmann::json;

namespace {

json num(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

double read_num(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    throw FormatError("expected a number, got " + j.dump());
}

void require_type(const json& j, const char* type) {
    if (!j.is_object() || !j.contains("type") || j.at("type") != type)
        throw FormatError(std::string("expected a set of type ") + type);
}

} // namespace

json vec_to_json(const Vec& v) {
    json out = json::array();
    for (int i = 0; i < v.size(); ++i) out.push_back(num(v(i)));
    return out;
}

json mat_to_json(const Mat& M) {
    json out = json::array();
    for (int i = 0; i < M.rows(); ++i) out.push_back(vec_to_json(M.row(i).transpose()));
    return out;
}

Vec vec_from_json(const json& j) {
    if (!j.is_array()) throw FormatError("expected an array");
    Vec v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v(i) = read_num(j[i]);
    return v;
}

Mat mat_from_json(const json& j, int cols) {
    if (!j.is_array()) throw FormatError("expected an array of rows");
    if (j.empty()) return Mat(0, cols);
    const auto c = j[0].is_array() ? j[0].size() : 0;
    Mat M(j.size(), c);
    for (std::size_t i = 0; i < j.size(); ++i) {
        const Vec row = vec_from_json(j[i]);
        if (static_cast<std::size_t>(row.size()) != c) throw FormatError("ragged matrix");
        M.row(i) = row.transpose();
    }
    return M;
}

json to_json(const HPolytope& P) {
    return {{"type", "hpoly"}, {"dim", P.dim()}, {"H", mat_to_json(P.H())}, {"h", vec_to_json(P.h())}};
}

json to_json(const Zonotope& Z) {
    return {{"type", "zonotope"}, {"c", vec_to_json(Z.center())}, {"G", mat_to_json(Z.generators())}};
}

json to_json(const LinearSystem& s) {
    return {{"A", mat_to_json(s.A)}, {"B", mat_to_json(s.B)}, {"C", mat_to_json(s.C)}, {"dt", s.dt}};
}

HPolytope hpoly_from_json(const json& j) {
    require_type(j, "hpoly");
    try {
        const int dim = j.contains("dim") ? j.at("dim").get<int>() : 0;
        Mat H = mat_from_json(j.at("H"), dim);
        Vec h = vec_from_json(j.at("h"));
        return HPolytope(std::move(H), std::move(h));
    } catch (const json::exception& e) {
        throw FormatError(e.what());
    }
}

Zonotope zonotope_from_json(const json& j) {
    require_type(j, "zonotope");
    try {
        Vec c = vec_from_json(j.at("c"));
        // G is n x k, written row by row; an empty list means no generators.
        Mat G = j.at("G").empty() ? Mat(c.size(), 0) : mat_from_json(j.at("G"));
        return Zonotope(std::move(c), std::move(G));
    } catch (const json::exception& e) {
        throw FormatError(e.what());
    }
}

LinearSystem system_from_json(const json& j) {
    try {
        Mat A = mat_from_json(j.at("A"));
        Mat B = mat_from_json(j.at("B"));
        Mat C = mat_from_json(j.at("C"), static_cast<int>(A.cols()));
        return LinearSystem(std::move(A), std::move(B), std::move(C), j.at("dt").get<double>());
    } catch (const json::exception& e) {
        throw FormatError(e.what());
    }
}

} // namespace fsmpc
