#include "wgpucb/checks.hpp"
#include "wgpucb/config.hpp"
#include "wgpucb/errors.hpp"
#include "wgpucb/harness.hpp"
#include "wgpucb/kernels.hpp"
#include "wgpucb/mig.hpp"
#include "wgpucb/policies.hpp"
#include "wgpucb/qff.hpp"
#include "wgpucb/wgp.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace wgpucb;

namespace {

Point to_point(const std::vector<double>& x) { return Eigen::Map<const Eigen::VectorXd>(x.data(), x.size()); }

GridKernel se_grid(std::size_t grid, double lengthscale) {
    return GridKernel(DomainGrid::uniform(grid), KernelSpec::squared_exponential(lengthscale));
}

BanditHistory make_history(std::size_t grid, const std::vector<ArmIndex>& arms, const std::vector<double>& ys) {
    if (arms.size() != ys.size()) {
        throw InputError("arms and rewards must have the same length");
    }
    BanditHistory h(grid);
    for (std::size_t i = 0; i < arms.size(); ++i) {
        h.append(arms[i], ys[i]);
    }
    return h;
}

py::dict summarize(const ExperimentResult& r) {
    py::dict out;
    out["policies"] = r.policies;
    py::list agg;
    for (const auto& row : r.aggregate) {
        agg.append(py::make_tuple(row.t, row.policy, row.mean, row.std_error));
    }
    out["aggregate"] = agg;
    py::dict finals;
    for (std::size_t p = 0; p < r.policies.size(); ++p) {
        std::vector<double> v;
        for (const auto& rec : r.records[p]) {
            v.push_back(rec.final_regret());
        }
        finals[py::str(r.policies[p])] = v;
    }
    out["final_regret"] = finals;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Weighted GP-UCB bandits for non-stationary reward functions";

    static py::exception<NumericalError> numerical(m, "NumericalError", PyExc_ArithmeticError);
    static py::exception<ProtocolError> protocol(m, "ProtocolError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) {
                std::rethrow_exception(p);
            }
        } catch (const NumericalError& e) {
            py::set_error(numerical, e.what());
        } catch (const ProtocolError& e) {
            py::set_error(protocol, e.what());
        } catch (const IoError& e) {
            py::set_error(PyExc_OSError, e.what());
        }
    });

    m.def("se_kernel", [](const std::vector<double>& x, const std::vector<double>& y, double l) {
        return se_kernel(to_point(x), to_point(y), l);
    }, py::arg("x"), py::arg("x2"), py::arg("lengthscale"));

    m.def("hermite_roots", &hermite_roots, py::arg("mbar"));
    m.def("qff_error_bound", &qff_error_bound, py::arg("mbar"), py::arg("dimension"), py::arg("lengthscale"));

    py::class_<QffMap>(m, "QffMap")
        .def_readonly("mbar", &QffMap::mbar)
        .def_readonly("dimension", &QffMap::dimension)
        .def_readonly("m", &QffMap::m)
        .def_readonly("nodes", &QffMap::nodes)
        .def_readonly("node_weights", &QffMap::node_weights)
        .def_readonly("lengthscale", &QffMap::lengthscale)
        .def_readonly("eps_m", &QffMap::eps_m)
        .def("features", [](const QffMap& q, const std::vector<double>& x) { return q.features(to_point(x)); })
        .def("feature_matrix", [](const QffMap& q, std::size_t grid) {
            return q.feature_matrix(DomainGrid::uniform(grid));
        }, py::arg("grid"));
    m.def("build_qff", &build_qff, py::arg("mbar"), py::arg("dimension"), py::arg("lengthscale"));

    m.def("kernel_matrix", [](std::size_t grid, double l) { return se_grid(grid, l).gram(); },
          py::arg("grid") = 100, py::arg("lengthscale") = 0.2);

    m.def("fit_posterior",
          [](const std::vector<ArmIndex>& arms, const std::vector<double>& ys, double eta, double lambda,
             std::size_t grid, double l, double truncation) {
              const GridKernel k = se_grid(grid, l);
              const auto p = fit_weighted_posterior(make_history(grid, arms, ys), WeightScheme{eta, lambda, truncation}, k);
              return py::make_tuple(p.means(), p.variances());
          },
          py::arg("arms"), py::arg("rewards"), py::arg("eta") = 1.0, py::arg("lam") = 1.0, py::arg("grid") = 100,
          py::arg("lengthscale") = 0.2, py::arg("truncation") = 1e-8,
          "Weighted posterior mean and variance on a uniform grid; rewards arrive at rounds 1..t.");

    m.def("empirical_mig",
          [](const std::vector<ArmIndex>& arms, double eta, double lambda, std::size_t grid, double l) {
              return empirical_double_weighted_mig(se_grid(grid, l), arms, WeightScheme{eta, lambda, 0.0});
          },
          py::arg("arms"), py::arg("eta") = 1.0, py::arg("lam") = 1.0, py::arg("grid") = 100,
          py::arg("lengthscale") = 0.2);

    m.def("beta_t", [](double b, double r, double lambda, double delta, double gamma_bar) {
        return beta_t(GPParams{b, r, lambda, delta}, gamma_bar);
    }, py::arg("B"), py::arg("R"), py::arg("lam"), py::arg("delta"), py::arg("gamma_bar"));

    py::class_<TuningOutput>(m, "TuningOutput")
        .def_readonly("eta", &TuningOutput::eta)
        .def_readonly("c", &TuningOutput::c)
        .def_readonly("mbar", &TuningOutput::mbar);
    m.def("tune_parameters", &tune_parameters, py::arg("horizon"), py::arg("gamma_dot"),
          py::arg("budget") = std::nullopt);
    m.def("order_wise_period", &order_wise_period, py::arg("horizon"), py::arg("budget"));

    m.def("mig_universal_bound", &mig_universal_bound, py::arg("n"), py::arg("horizon"), py::arg("kdot"),
          py::arg("lam"), py::arg("delta_n"));
    m.def("mig_weight_bound", [](std::size_t n, double eta, double kdot, double lambda, double delta_n, bool single) {
        return mig_weight_bound(n, eta, kdot, lambda, delta_n, single ? WeightOrder::Single : WeightOrder::Double);
    }, py::arg("n"), py::arg("eta"), py::arg("kdot"), py::arg("lam"), py::arg("delta_n"), py::arg("single") = false);
    m.def("mig_eigendecay_bound",
          [](const std::string& kind, double eta, double kdot, double lambda, double c_p, double beta_p, double c_e1,
             double c_e2, double psi, bool single) {
              EigendecayParams p;
              if (kind == "polynomial") {
                  p.kind = EigendecayKind::Polynomial;
              } else if (kind == "exponential") {
                  p.kind = EigendecayKind::Exponential;
              } else {
                  throw InputError("kind must be polynomial or exponential");
              }
              p.c_p = c_p;
              p.beta_p = beta_p;
              p.c_e1 = c_e1;
              p.c_e2 = c_e2;
              p.psi = psi;
              return mig_eigendecay_bound(p, eta, kdot, lambda, single ? WeightOrder::Single : WeightOrder::Double);
          },
          py::arg("kind"), py::arg("eta"), py::arg("kdot") = 1.0, py::arg("lam") = 1.0, py::arg("Cp") = 1.0,
          py::arg("betap") = 2.0, py::arg("Ce1") = 1.0, py::arg("Ce2") = 1.0, py::arg("psi") = 1.0,
          py::arg("single") = false);

    m.def("default_config", &default_config_text);
    m.def("simulate", [](const std::string& config_text) {
        const ExperimentConfig cfg = parse_config_string(config_text);
        py::gil_scoped_release release;
        ExperimentResult r = simulate_experiment(cfg);
        py::gil_scoped_acquire acquire;
        return summarize(r);
    }, py::arg("config_text"), "Runs an experiment from config text without writing files.");
    m.def("run_experiment", [](const std::filesystem::path& path, std::optional<std::filesystem::path> output) {
        ExperimentConfig cfg = load_config(path);
        if (output) {
            cfg.output_dir = *output;
        }
        py::gil_scoped_release release;
        ExperimentResult r = run_experiment(cfg);
        py::gil_scoped_acquire acquire;
        return summarize(r);
    }, py::arg("config"), py::arg("output") = std::nullopt);

    m.def("check", [] {
        py::list out;
        for (const auto& c : run_invariant_checks()) {
            out.append(py::make_tuple(c.name, c.passed, c.detail));
        }
        return out;
    });
}
