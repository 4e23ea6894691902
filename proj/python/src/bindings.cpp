#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "expectation_atlas/boundary.hpp"
#include "expectation_atlas/certificates.hpp"
#include "expectation_atlas/errors.hpp"
#include "expectation_atlas/flow.hpp"
#include "expectation_atlas/gibbs.hpp"
#include "expectation_atlas/io.hpp"

namespace py = pybind11;
namespace ea = expectation_atlas;

namespace {

std::vector<ea::HermitianOperator> to_operators(const std::vector<ea::CMatrix>& mats) {
  std::vector<ea::HermitianOperator> out;
  out.reserve(mats.size());
  for (const auto& m : mats) out.emplace_back(m);
  return out;
}

std::vector<ea::CMatrix> matrices(const std::vector<ea::HermitianOperator>& ops) {
  std::vector<ea::CMatrix> out;
  for (const auto& o : ops) out.push_back(o.matrix());
  return out;
}

ea::FlowParams make_params(double dt, int max_steps, double delta_tol, std::optional<double> beta_cap,
                           const std::string& integrator) {
  ea::FlowParams p;
  p.dt = dt;
  p.max_steps = max_steps;
  p.delta_tol = delta_tol;
  p.beta_cap = beta_cap;
  p.integrator = ea::parse_integrator(integrator);
  return p;
}

py::dict flow_dict(const ea::FlowResult& r) {
  py::dict d;
  d["classification"] = std::string(ea::to_string(r.classification));
  d["termination"] = std::string(ea::to_string(r.termination));
  d["beta"] = r.beta_final;
  d["expectations"] = r.expectations_final;
  d["residual"] = r.residual;
  d["steps"] = r.steps;
  d["rejected_steps"] = r.rejected_steps;
  if (r.state) {
    d["state"] = r.state->matrix();
  } else {
    d["state"] = py::none();
  }
  std::vector<double> t, delta;
  for (const auto& s : r.trajectory) {
    t.push_back(s.t);
    delta.push_back(s.delta);
  }
  d["t"] = t;
  d["delta"] = delta;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Joint expectation-value ranges of Hermitian operators";

  auto base = py::register_exception<ea::Error>(m, "Error");
  py::register_exception<ea::ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<ea::DomainError>(m, "DomainError", base.ptr());
  py::register_exception<ea::NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<ea::PreconditionError>(m, "PreconditionError", base.ptr());
  py::register_exception<ea::UnsupportedError>(m, "UnsupportedError", base.ptr());
  py::register_exception<ea::ParseError>(m, "ParseError", base.ptr());

  py::class_<ea::OperatorSet>(m, "OperatorSet")
      .def(py::init([](const std::vector<ea::CMatrix>& ops, std::vector<std::string> labels) {
             return ea::OperatorSet(to_operators(ops), std::move(labels));
           }),
           py::arg("operators"), py::arg("labels") = std::vector<std::string>{})
      .def_static(
          "project_traceless",
          [](const std::vector<ea::CMatrix>& ops, std::vector<std::string> labels) {
            return ea::OperatorSet::project_traceless(to_operators(ops), std::move(labels));
          },
          py::arg("operators"), py::arg("labels") = std::vector<std::string>{})
      .def_static(
          "load",
          [](const std::string& path, bool project_traceless) {
            return ea::to_operator_set(ea::operator_file_from_json(ea::parse_json(ea::read_file(path), path)),
                                       project_traceless);
          },
          py::arg("path"), py::arg("project_traceless") = false)
      .def_property_readonly("dim", &ea::OperatorSet::dim)
      .def_property_readonly("labels", &ea::OperatorSet::labels)
      .def_property_readonly("gram", &ea::OperatorSet::gram)
      .def_property_readonly("offsets", &ea::OperatorSet::offsets)
      .def_property_readonly("operators", [](const ea::OperatorSet& s) { return matrices(s.ops()); })
      .def("__len__", &ea::OperatorSet::size);

  m.def("basis", [](ea::Index dim) { return matrices(ea::build_basis(dim).elements()); }, py::arg("dim"));
  m.def("full_basis_set", [](ea::Index dim) { return ea::build_basis(dim).as_operator_set(); }, py::arg("dim"));
  m.def("marginal_operator_set", &ea::marginal_operator_set, py::arg("dim_a"), py::arg("dim_b"));

  m.def("expectation_map", &ea::expectation_map, py::arg("beta"), py::arg("ops"));
  m.def("jacobian", &ea::jacobian, py::arg("beta"), py::arg("ops"));
  m.def("log_partition", &ea::log_partition, py::arg("beta"), py::arg("ops"));
  m.def(
      "gibbs_state", [](const ea::RVector& beta, const ea::OperatorSet& ops) { return ea::gibbs_state(beta, ops).matrix(); },
      py::arg("beta"), py::arg("ops"));

  m.def(
      "solve",
      [](const ea::OperatorSet& ops, const ea::RVector& target, double dt, int max_steps, double delta_tol,
         std::optional<double> beta_cap, const std::string& integrator) {
        ea::FlowResult r;
        {
          py::gil_scoped_release release;
          r = ea::solve(ops, target, make_params(dt, max_steps, delta_tol, beta_cap, integrator));
        }
        return flow_dict(r);
      },
      py::arg("ops"), py::arg("target"), py::arg("dt") = 0.4, py::arg("max_steps") = 2000,
      py::arg("delta_tol") = 1e-24, py::arg("beta_cap") = py::none(), py::arg("integrator") = "euler");
  m.def(
      "classify",
      [](const ea::OperatorSet& ops, const ea::RVector& target) {
        return std::string(ea::to_string(ea::classify(ops, target)));
      },
      py::arg("ops"), py::arg("target"));
  m.def(
      "solve_marginal",
      [](const ea::CMatrix& rho_a, const ea::CMatrix& rho_b) {
        return flow_dict(ea::solve_marginal(ea::DensityMatrix(rho_a), ea::DensityMatrix(rho_b)));
      },
      py::arg("rho_a"), py::arg("rho_b"));
  m.def(
      "state_family",
      [](const ea::OperatorSet& ops, const ea::RVector& target) {
        const ea::StateFamily f = ea::state_family(ops, target);
        py::dict d;
        d["state"] = f.center.matrix();
        d["beta"] = f.beta;
        d["perp_basis"] = matrices(f.perp_basis);
        d["intervals"] = f.intervals;
        return d;
      },
      py::arg("ops"), py::arg("target"));

  m.def("support_value", &ea::support_value, py::arg("direction"), py::arg("ops"));
  m.def(
      "trace_boundary",
      [](const ea::OperatorSet& ops, int num_dirs, int threads) {
        py::list out;
        for (const auto& f : ea::trace_boundary(ops, num_dirs, threads)) {
          py::dict d;
          d["theta"] = f.theta;
          d["support"] = f.support;
          d["ground_dim"] = f.ground_dim;
          d["points"] = f.points;
          out.append(d);
        }
        return out;
      },
      py::arg("ops"), py::arg("num_dirs") = 360, py::arg("threads") = 1);
  m.def("commuting_polytope", &ea::commuting_polytope, py::arg("ops"), py::arg("tol") = 1e-10);
  m.def(
      "outer_hull_violation",
      [](const ea::OperatorSet& ops, const ea::RVector& x, int num_dirs, std::uint64_t seed) {
        const auto dirs = ea::sphere_directions(ops.size(), num_dirs, seed);
        return ea::sampled_outer_hull(ops, dirs).max_violation(x);
      },
      py::arg("ops"), py::arg("x"), py::arg("num_dirs") = 500, py::arg("seed") = 0);

  m.def(
      "positivity_min_eigenvalue",
      [](const ea::RVector& x, ea::Index dim) {
        return ea::positivity_matrix(x, ea::structure_tensors(ea::build_basis(dim))).min_eigenvalue();
      },
      py::arg("x"), py::arg("dim"));
  m.def(
      "is_member_positivity",
      [](const ea::RVector& x, ea::Index dim, double tol) {
        return ea::is_member_positivity(x, ea::structure_tensors(ea::build_basis(dim)), tol);
      },
      py::arg("x"), py::arg("dim"), py::arg("tol") = 1e-9);
  m.def(
      "purity_report",
      [](const ea::CMatrix& rho) {
        const ea::DensityMatrix state(rho);
        const ea::BasisSet basis = ea::build_basis(state.dim());
        const ea::PurityReport r = ea::purity_report(state, basis, ea::structure_tensors(basis));
        py::dict d;
        d["r_trace"] = r.r_trace;
        d["r_quadratic"] = r.r_quadratic;
        d["r_charpoly"] = r.r_charpoly;
        d["r_subdet"] = r.r_subdet;
        d["pure"] = r.pure();
        d["verdicts_agree"] = r.verdicts_agree();
        return d;
      },
      py::arg("rho"));
  m.def(
      "uncertainty_residual",
      [](const ea::CMatrix& rho, const ea::CMatrix& o1, const ea::CMatrix& o2) {
        return ea::uncertainty_residual(ea::DensityMatrix(rho), ea::HermitianOperator(o1), ea::HermitianOperator(o2));
      },
      py::arg("rho"), py::arg("o1"), py::arg("o2"));
}
