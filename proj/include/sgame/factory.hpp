#pragma once

#include <Eigen/Core>
#include <map>
#include <string>

#include "sgame/model.hpp"

namespace sgame {

/// Builds a model family by name from a flat parameter map (the same names
/// the constructors record in ModelSpec::params). Optional tables carry
/// vector-valued inputs: "zeta" for spillovers, "demand" for supply chains.
ModelSpec build_model(const std::string& family,
                      const std::map<std::string, double>& params,
                      const std::map<std::string, Eigen::VectorXd>& tables = {});

}  // namespace sgame
