#pragma once

#include <functional>
#include <initializer_list>
#include <string>

#include <json.hpp>

#include "hjbi/game_model.hpp"

namespace hjbi {

using json = nlohmann::json;

// Rejects unknown keys in a config object; the error lists every offender.
void ensure_keys(const json& obj, std::initializer_list<const char*> allowed,
                 const std::string& context);

// Named function families with numeric parameters, selected by
// {"family": "...", ...} specs in the config file.
//
// Vector families (dynamics and jump maps):
//   zero | constant{value} | control{scale} | affine{c0,s_coef,y_coef,u_coef}
//   | saturating{amp,bias,s_coef,y_coef,u_coef}
// Scalar families (running gain, costs, terminal gain):
//   zero | constant{value} | affine{c0,s_coef,y_coef,u_coef}
//   | quadratic{c0,s_coef,y_lin,u_lin,y_quad,u_quad}
//   | fixed_plus_proportional{fixed,proportional} | norm_cost{base,coef}
//   | saturating{amp,bias,s_coef,y_coef,u_coef} | time_table{times,values}
VectorFn make_vector_function(const json& spec, int state_dim, int control_dim,
                              const std::string& context);
ScalarFn make_scalar_function(const json& spec, int state_dim, int control_dim,
                              const std::string& context);
TerminalFn make_terminal_function(const json& spec, int state_dim, const std::string& context);

// Damping families: exp (e^{-lambda h}, the default), inverse (1/(1+lambda h)),
// constant{value}.
DampingFn make_damping_function(const json& spec, double lambda, const std::string& context);

// Scalar functions of time only (return curves): constant{value},
// affine{c0,s_coef}, time_table{times,values}.
std::function<double(double)> make_time_function(const json& spec, const std::string& context);

}  // namespace hjbi
