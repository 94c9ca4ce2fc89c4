#pragma once

// JSON (de)serialization for basis dictionaries and coefficient layouts,
// shared by config files, kernel-set exports and fit reports.

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "wcr/dictionary.hpp"

namespace wcr {

inline nlohmann::json basis_element_to_json(const BasisElement& e) {
    nlohmann::json j;
    switch (e.kind) {
        case BasisKind::Monomial:
            j["kind"] = "monomial";
            j["exponents"] = e.exponents;
            return j;
        case BasisKind::Sin: j["kind"] = "sin"; break;
        case BasisKind::Cos: j["kind"] = "cos"; break;
        case BasisKind::Sin3: j["kind"] = "sin3"; break;
        case BasisKind::Cos3: j["kind"] = "cos3"; break;
        case BasisKind::AbsPowAlpha: j["kind"] = "abs_pow_alpha"; break;
    }
    j["axis"] = e.axis;
    return j;
}

inline BasisElement basis_element_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "monomial")
        return BasisElement::monomial(j.at("exponents").get<std::vector<int>>());
    int axis = j.at("axis").get<int>();
    if (kind == "sin") return BasisElement::trig(BasisKind::Sin, axis);
    if (kind == "cos") return BasisElement::trig(BasisKind::Cos, axis);
    if (kind == "sin3") return BasisElement::trig(BasisKind::Sin3, axis);
    if (kind == "cos3") return BasisElement::trig(BasisKind::Cos3, axis);
    if (kind == "abs_pow_alpha") return BasisElement::abs_pow_alpha(axis);
    throw std::invalid_argument("basis_element_from_json: unknown kind " + kind);
}

inline nlohmann::json basis_to_json(const BasisDictionary& d) {
    nlohmann::json j;
    j["dim"] = d.dim();
    j["elements"] = nlohmann::json::array();
    for (const auto& e : d.elements()) j["elements"].push_back(basis_element_to_json(e));
    if (d.alpha()) j["alpha"] = *d.alpha();
    return j;
}

inline BasisDictionary basis_from_json(const nlohmann::json& j) {
    std::vector<BasisElement> elems;
    for (const auto& e : j.at("elements")) elems.push_back(basis_element_from_json(e));
    std::optional<double> alpha;
    if (j.contains("alpha")) alpha = j.at("alpha").get<double>();
    return BasisDictionary(j.at("dim").get<int>(), std::move(elems), alpha);
}

inline std::string to_string(DiffusionStructure s) {
    switch (s) {
        case DiffusionStructure::Full: return "full";
        case DiffusionStructure::Diagonal: return "diagonal";
        case DiffusionStructure::ConstantDiagonal: return "constant_diagonal";
        case DiffusionStructure::None: return "none";
    }
    return "?";
}
inline DiffusionStructure diffusion_structure_from_string(const std::string& s) {
    if (s == "full") return DiffusionStructure::Full;
    if (s == "diagonal") return DiffusionStructure::Diagonal;
    if (s == "constant_diagonal") return DiffusionStructure::ConstantDiagonal;
    if (s == "none") return DiffusionStructure::None;
    throw std::invalid_argument("unknown diffusion structure: " + s);
}
inline std::string to_string(LevyStructure s) {
    return s == LevyStructure::ConstantDiagonal ? "constant_diagonal" : "functional_1d";
}
inline LevyStructure levy_structure_from_string(const std::string& s) {
    if (s == "constant_diagonal") return LevyStructure::ConstantDiagonal;
    if (s == "functional_1d") return LevyStructure::Functional1d;
    throw std::invalid_argument("unknown levy structure: " + s);
}

inline nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}
inline Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
    auto v = j.get<std::vector<double>>();
    return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace wcr
