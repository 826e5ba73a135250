#pragma once

#include "fsmpc/linsys.hpp"
#include "fsmpc/polytope.hpp"

#include <json.hpp>

namespace fsmpc {

/// Malformed input document.
class FormatError : public Error {
public:
    using Error::Error;
};

nlohmann::json vec_to_json(const Vec& v);
nlohmann::json mat_to_json(const Mat& M);
/// Non-finite entries are written as the strings "inf" / "-inf".
Vec vec_from_json(const nlohmann::json& j);
/// `cols` is used when the matrix has no rows.
Mat mat_from_json(const nlohmann::json& j, int cols = 0);

nlohmann::json to_json(const HPolytope& P);
nlohmann::json to_json(const Zonotope& Z);
nlohmann::json to_json(const LinearSystem& sys);

HPolytope hpoly_from_json(const nlohmann::json& j);
Zonotope zonotope_from_json(const nlohmann::json& j);
LinearSystem system_from_json(const nlohmann::json& j);

} // namespace fsmpc
