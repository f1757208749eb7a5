#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "relkep/actionangle.hpp"
#include "relkep/orbits.hpp"
#include "relkep/radial.hpp"
#include "relkep/systems.hpp"

namespace py = pybind11;
using namespace relkep;

namespace {

SystemSpec make_system(const py::object& sys) {
    if (py::isinstance<LeviCivitaSystem>(sys)) return sys.cast<LeviCivitaSystem>();
    return sys.cast<RelativisticSystem>();
}

PerturbationSpec make_perturbation(const std::vector<std::tuple<double, int, int>>& terms) {
    PerturbationSpec U;
    for (const auto& [c, a, b] : terms) U.terms.push_back({c, a, b});
    return U;
}

py::dict orbit_dict(const SystemSpec& sys, double H_star, const PeriodicOrbit& orb,
                    const OrbitVerification& v) {
    py::dict d;
    d["family"] = family_name(sys);
    d["H_star"] = H_star;
    d["k"] = orb.k;
    d["eps"] = orb.eps;
    d["tau"] = orb.tau;
    d["winding"] = v.winding;
    d["s0"] = std::vector<double>{orb.s0.x.x, orb.s0.x.y, orb.s0.p.x, orb.s0.p.y};
    d["closure_residual"] = v.closure_residual;
    d["energy_residual"] = v.max_energy_dev;
    d["minimal"] = v.minimal;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Periodic-orbit toolkit for two relativistic Kepler systems";

    py::class_<LeviCivitaSystem>(m, "LeviCivitaSystem")
        .def(py::init([](double m_, double kappa, double lambda) {
                 LeviCivitaSystem s{m_, kappa, lambda};
                 s.validate();
                 return s;
             }),
             py::arg("m") = 1.0, py::arg("kappa") = 1.0, py::arg("lambda_") = 0.1)
        .def_readonly("m", &LeviCivitaSystem::m)
        .def_readonly("kappa", &LeviCivitaSystem::kappa)
        .def_readonly("lambda_", &LeviCivitaSystem::lambda);

    py::class_<RelativisticSystem>(m, "RelativisticSystem")
        .def(py::init([](double m_, double alpha, double c) {
                 RelativisticSystem s{m_, alpha, c};
                 s.validate();
                 return s;
             }),
             py::arg("m") = 1.0, py::arg("alpha") = 1.0, py::arg("c") = 10.0)
        .def_readonly("m", &RelativisticSystem::m)
        .def_readonly("alpha", &RelativisticSystem::alpha)
        .def_readonly("c", &RelativisticSystem::c);

    m.def("hamiltonian",
          [](const py::object& sys, std::array<double, 2> x, std::array<double, 2> p,
             double eps, const std::vector<std::tuple<double, int, int>>& U) {
              return hamiltonian(make_system(sys), {{x[0], x[1]}, {p[0], p[1]}}, eps,
                                 make_perturbation(U));
          },
          py::arg("sys"), py::arg("x"), py::arg("p"), py::arg("eps") = 0.0,
          py::arg("perturbation") = std::vector<std::tuple<double, int, int>>{});

    m.def("admissible", [](const py::object& sys, double H, double L) {
        return admissible(make_system(sys), {H, L});
    });
    m.def("turning_points", [](const py::object& sys, double H, double L) {
        return turning_points(make_system(sys), {H, L});
    });
    m.def("radial_period_closed", [](const py::object& sys, double H, double L) {
        return radial_period_closed(make_system(sys), {H, L});
    });
    m.def("radial_period_quadrature", [](const py::object& sys, double H, double L) {
        return radial_period_quadrature(make_system(sys), {H, L});
    });
    m.def("apsidal_angle_closed", [](const py::object& sys, double H, double L) {
        return apsidal_angle_closed(make_system(sys), {H, L});
    });
    m.def("apsidal_angle_quadrature", [](const py::object& sys, double H, double L) {
        return apsidal_angle_quadrature(make_system(sys), {H, L});
    });
    m.def("area_quadrature", [](const py::object& sys, double H, double L) {
        return area_quadrature(make_system(sys), {H, L});
    });
    m.def("area_closed", [](const LeviCivitaSystem& sys, double H, double L) {
        return area_closed(sys, {H, L});
    });

    m.def("actions_from_hl", [](const py::object& sys, double H, double L) {
        const ActionPair I = actions_from_hl(make_system(sys), {H, L});
        return std::make_pair(I.I1, I.I2);
    });
    m.def("k0", [](const py::object& sys, double I1, double I2) {
        return k0(make_system(sys), {I1, I2});
    });
    m.def("k0_gradient", [](const py::object& sys, double I1, double I2) {
        const Gradient2 g = k0_gradient(make_system(sys), {I1, I2});
        return std::make_pair(g.g1, g.g2);
    });
    m.def("isoenergetic_nondegeneracy", [](const py::object& sys, double I1, double I2) {
        const NondegeneracyReport rep = isoenergetic_nondegeneracy(make_system(sys), {I1, I2});
        py::dict d;
        d["grad"] = std::make_pair(rep.grad1, rep.grad2);
        d["hessian"] = std::vector<double>{rep.hessian.h11, rep.hessian.h12, rep.hessian.h22};
        d["bordered_det"] = rep.bordered_det;
        d["quadratic_form"] = rep.quadratic_form;
        d["fd_error"] = rep.fd_error;
        return d;
    });

    m.def("winding_floor", [](const py::object& sys, double H) {
        return winding_floor(make_system(sys), H);
    });
    m.def("solve_resonant_L", [](const py::object& sys, double H, int k) {
        const TorusSeed seed = solve_resonant_L(make_system(sys), H, k);
        py::dict d;
        d["H"] = seed.em.H;
        d["L"] = seed.em.L;
        d["k"] = seed.k;
        d["T"] = seed.T;
        d["Theta"] = seed.Theta;
        return d;
    });
    m.def("levi_civita_physical", &levi_civita_physical, py::arg("G"), py::arg("M"),
          py::arg("m"), py::arg("c"), py::arg("E"));

    m.def("find_prescribed_energy_orbits",
          [](const py::object& sys, const std::vector<std::tuple<double, int, int>>& U,
             double eps, double H_star, int k, int n_seeds, int jobs) {
              const SystemSpec spec = make_system(sys);
              const PerturbationSpec pert = make_perturbation(U);
              ShootingOptions opts;
              opts.n_seeds = n_seeds;
              const OrbitSearchResult res =
                  find_prescribed_energy_orbits(spec, pert, eps, H_star, k, opts, jobs);
              py::list out;
              for (const auto& orb : res.orbits)
                  out.append(orbit_dict(spec, H_star, orb,
                                        verify_orbit(spec, pert, eps, orb, H_star)));
              return out;
          },
          py::arg("sys"), py::arg("perturbation"), py::arg("eps"), py::arg("H_star"),
          py::arg("k"), py::arg("n_seeds") = 16, py::arg("jobs") = 1);
}
