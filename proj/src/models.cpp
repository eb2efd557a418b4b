#include <cmath>

#include "dynq/dynamics.hpp"
#include "dynq/errors.hpp"

namespace dynq {

namespace {

// Kinematic bicycle referenced at the rear axle: x = (px, py, heading),
// u = (rear wheel velocity, steering angle).
ControlSystem bicycle() {
  ControlSystem s;
  s.name = "bicycle";
  s.state_dim = 3;
  s.input_dim = 2;
  s.vector_field = [](std::span<const double> x, std::span<const double> u, std::span<double> dx) {
    const double alpha = std::atan(std::tan(u[1]) / 2.0);
    const double speed = u[0] / std::cos(alpha);
    dx[0] = speed * std::cos(alpha + x[2]);
    dx[1] = speed * std::sin(alpha + x[2]);
    dx[2] = u[0] * std::tan(u[1]);
  };
  s.input_box = Box({-1.0, -1.0}, {1.0, 1.0});
  // Only the heading enters f, with slope at most |u1| / cos(alpha).
  s.lipschitz = 1.0 / std::cos(std::atan(std::tan(1.0) / 2.0));
  s.reverse_input = [](std::span<const double> u) { return Vec{-u[0], u[1]}; };
  return s;
}

ControlSystem scalar_linear() {
  ControlSystem s;
  s.name = "scalar_linear";
  s.state_dim = 1;
  s.input_dim = 1;
  s.vector_field = [](std::span<const double> x, std::span<const double> u, std::span<double> dx) {
    dx[0] = -x[0] + u[0];
  };
  s.input_box = Box({-1.0}, {1.0});
  s.lipschitz = 1.0;
  return s;
}

ControlSystem double_integrator() {
  ControlSystem s;
  s.name = "double_integrator";
  s.state_dim = 2;
  s.input_dim = 1;
  s.vector_field = [](std::span<const double> x, std::span<const double> u, std::span<double> dx) {
    dx[0] = x[1];
    dx[1] = u[0];
  };
  s.input_box = Box({-1.0}, {1.0});
  s.lipschitz = 1.0;
  return s;
}

}  // namespace

ControlSystem make_model(const std::string& name) {
  if (name == "bicycle") return bicycle();
  if (name == "scalar_linear") return scalar_linear();
  if (name == "double_integrator") return double_integrator();
  throw PreconditionError("unknown model '" + name + "'");
}

std::vector<std::string> model_names() { return {"bicycle", "scalar_linear", "double_integrator"}; }

}  // namespace dynq
