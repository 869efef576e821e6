#pragma once
#include <stdexcept>
#include <string>

namespace admr {

// Exit-code taxonomy: config_error -> 2, model_error -> 3 (see cli main).
struct config_error : std::runtime_error {
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct model_error : std::runtime_error {
  explicit model_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct singular_system : model_error {
  explicit singular_system(const std::string& msg) : model_error("singular_system: " + msg) {}
};

struct non_convergence : model_error {
  explicit non_convergence(const std::string& msg) : model_error("non_convergence: " + msg) {}
};

struct negative_concentration : model_error {
  explicit negative_concentration(const std::string& msg) : model_error("negative_concentration: " + msg) {}
};

struct unity_round_trip : model_error {
  explicit unity_round_trip(const std::string& msg) : model_error("unity_round_trip: " + msg) {}
};

struct no_convergence : model_error {
  explicit no_convergence(const std::string& msg) : model_error("no_convergence: " + msg) {}
};

struct zero_slope : model_error {
  explicit zero_slope(const std::string& msg) : model_error("zero_slope: " + msg) {}
};

struct step_underflow : model_error {
  explicit step_underflow(const std::string& msg) : model_error("step_underflow: " + msg) {}
};

struct empty_grid : model_error {
  explicit empty_grid(const std::string& msg) : model_error("empty_grid: " + msg) {}
};

struct trace_too_short : model_error {
  explicit trace_too_short(const std::string& msg) : model_error("trace_too_short: " + msg) {}
};

struct tau_out_of_range : model_error {
  explicit tau_out_of_range(const std::string& msg) : model_error("tau_out_of_range: " + msg) {}
};

struct bad_params : model_error {
  explicit bad_params(const std::string& msg) : model_error("bad_params: " + msg) {}
};

}  // namespace admr
