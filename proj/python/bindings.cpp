#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "pfplace/ensemble.hpp"
#include "pfplace/error.hpp"
#include "pfplace/placement.hpp"
#include "pfplace/version.hpp"

namespace py = pybind11;
using namespace pfplace;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_array(std::span<const double> v) {
  Array a(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

DensityVector to_density(const Array& a) {
  if (a.ndim() != 1) throw DimensionError("density must be one-dimensional");
  return DensityVector(std::vector<double>(a.data(), a.data() + a.size()));
}

Array dense(const SparseMatrix& m) {
  Array a({static_cast<py::ssize_t>(m.rows()), static_cast<py::ssize_t>(m.cols())});
  const auto d = m.to_dense();
  std::copy(d.begin(), d.end(), a.mutable_data());
  return a;
}

py::tuple csr(const SparseMatrix& m) {
  return py::make_tuple(m.row_ptr(), m.col_idx(), m.values(),
                        py::make_tuple(m.rows(), m.cols()));
}

CellSet cells(const std::vector<std::size_t>& idx, std::size_t n) { return CellSet(idx, n); }

}  // namespace

PYBIND11_MODULE(_pfplace, m) {
  m.doc() = "Markov-operator contaminant tracking and sensor placement";
  m.attr("__version__") = kVersion;

  // Base first: pybind11 tries the most recently registered translator first.
  auto& base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<IndexError>(m, "IndexError", base.ptr());
  py::register_exception<GeometryError>(m, "GeometryError", base.ptr());
  py::register_exception<ParameterError>(m, "ParameterError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<StabilityError>(m, "StabilityError", base.ptr());
  py::register_exception<IntegrityError>(m, "IntegrityError", base.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<ConservationError>(m, "ConservationError", base.ptr());
  py::register_exception<PlacementError>(m, "PlacementError", base.ptr());

  py::class_<Grid>(m, "Grid")
      .def_static("uniform", &Grid::uniform, py::arg("nx"), py::arg("ny"), py::arg("dx"),
                  py::arg("dy"), py::arg("x0") = 0.0, py::arg("y0") = 0.0)
      .def_static("from_config", [](const std::string& text) { return Grid(parse_grid_config(text)); },
                  py::arg("text"))
      .def_static("load", &load_grid, py::arg("path"))
      .def_property_readonly("nx", &Grid::nx)
      .def_property_readonly("ny", &Grid::ny)
      .def_property_readonly("dx", &Grid::dx)
      .def_property_readonly("dy", &Grid::dy)
      .def_property_readonly("size", &Grid::size)
      .def_property_readonly("total_volume", &Grid::total_volume)
      .def("index", &Grid::index, py::arg("i"), py::arg("j"))
      .def("obstructed", &Grid::obstructed, py::arg("k"))
      .def("volumes", [](const Grid& g) { return to_array(g.volumes()); })
      .def("__len__", &Grid::size);

  py::class_<VelocityField>(m, "VelocityField")
      .def(py::init([](const Grid& g, const Array& u, const Array& v) {
             return VelocityField(g, std::vector<double>(u.data(), u.data() + u.size()),
                                  std::vector<double>(v.data(), v.data() + v.size()));
           }),
           py::arg("grid"), py::arg("u"), py::arg("v"))
      .def_static("load", &load_field, py::arg("path"), py::arg("grid"))
      .def("save", [](const VelocityField& f, const std::filesystem::path& p) { write_field(f, p); })
      .def_property_readonly("grid", &VelocityField::grid)
      .def_property_readonly("u", [](const VelocityField& f) { return to_array(f.u()); })
      .def_property_readonly("v", [](const VelocityField& f) { return to_array(f.v()); })
      .def_property_readonly("obstructed",
                             [](const VelocityField& f) {
                               const auto mask = f.obstruction_mask();
                               return std::vector<bool>(mask.begin(), mask.end());
                             })
      .def("max_speed", &VelocityField::max_speed)
      .def("__len__", &VelocityField::size);

  m.def("gen_double_gyre", &gen_double_gyre, py::arg("grid"), py::arg("amplitude"));
  m.def("gen_channel_flow", &gen_channel_flow, py::arg("grid"), py::arg("u_max"));
  m.def("map_to_reference", &map_to_reference, py::arg("field"), py::arg("ref_grid"));

  m.def("cfl_dt", [](const VelocityField& f, double d) { return cfl_dt(f, d); }, py::arg("field"),
        py::arg("diffusivity"));
  m.def(
      "solve",
      [](const Array& initial, const VelocityField& f, double d, double t, double sync) {
        TransportOptions opts;
        opts.sync_interval = sync;
        const auto r = solve(to_density(initial), f, d, t, {}, opts);
        return py::make_tuple(to_array(r.density.values()), r.exited_mass, r.substeps);
      },
      py::arg("initial"), py::arg("field"), py::arg("diffusivity"), py::arg("t_end"),
      py::arg("sync_interval") = 0.0,
      "Direct transport solve; returns (density, exited_mass, substeps).");

  py::class_<MarkovMatrix>(m, "MarkovMatrix")
      .def_static("load", [](const std::filesystem::path& p) { return load(p); }, py::arg("path"))
      .def("save", [](const MarkovMatrix& P, const std::filesystem::path& p) { save(P, p); })
      .def_property_readonly("n_states", &MarkovMatrix::n_states)
      .def_property_readonly("sink", &MarkovMatrix::sink)
      .def_property_readonly("dt_markov", &MarkovMatrix::dt_markov)
      .def_property_readonly("nnz", [](const MarkovMatrix& P) { return P.matrix().nnz(); })
      .def("to_dense", [](const MarkovMatrix& P) { return dense(P.matrix()); })
      .def("csr", [](const MarkovMatrix& P) { return csr(P.matrix()); },
           "(row_ptr, col_idx, values, shape)");

  m.def(
      "build",
      [](const VelocityField& f, double d, double dt, unsigned threads) {
        BuildOptions opts;
        opts.threads = threads;
        py::gil_scoped_release release;
        return build(f, d, dt, opts);
      },
      py::arg("field"), py::arg("diffusivity"), py::arg("dt_markov"), py::arg("threads") = 0);
  m.def(
      "propagate",
      [](const Array& state, const MarkovMatrix& P, std::size_t steps) {
        DensityVector s = to_density(state);
        if (s.size() == P.cell_count()) s = with_sink(s);
        return to_array(propagate(s, P, steps).values());
      },
      py::arg("state"), py::arg("P"), py::arg("steps"),
      "Propagates a density (with or without the sink entry); returns n_states values.");

  py::class_<TrackingMatrix>(m, "TrackingMatrix")
      .def_static("load", &load_tracking, py::arg("path"))
      .def("save", [](const TrackingMatrix& q, const std::filesystem::path& p) { save(q, p); })
      .def_property_readonly("kind", [](const TrackingMatrix& q) { return std::string(to_string(q.kind())); })
      .def_property_readonly("steps", &TrackingMatrix::steps)
      .def_property_readonly("tau", &TrackingMatrix::tau)
      .def_property_readonly("shape", [](const TrackingMatrix& q) { return py::make_tuple(q.rows(), q.cols()); })
      .def_property_readonly("nnz", [](const TrackingMatrix& q) { return q.matrix().nnz(); })
      .def("to_dense", [](const TrackingMatrix& q) { return dense(q.matrix()); })
      .def_static("from_dense",
                  [](const Array& a) {
                    if (a.ndim() != 2) throw DimensionError("expected a 2-D array");
                    const auto r = static_cast<std::size_t>(a.shape(0));
                    const auto c = static_cast<std::size_t>(a.shape(1));
                    return TrackingMatrix(TrackingKind::binary,
                                          SparseMatrix::from_dense(
                                              r, c, std::span<const double>(a.data(), r * c)),
                                          1, 1.0);
                  },
                  py::arg("pattern"), "Binary pattern from a dense 0/1 array.");

  m.def("tracking_matrix", [](const MarkovMatrix& P, std::size_t m_) { return tracking_matrix(P, m_); },
        py::arg("P"), py::arg("steps"));
  m.def("tracking_pattern",
        [](const MarkovMatrix& P, std::size_t m_, double eps) { return tracking_pattern(P, m_, eps); },
        py::arg("P"), py::arg("steps"), py::arg("eps_acc"));
  m.def("apply_location_constraint",
        [](const TrackingMatrix& q, const std::vector<std::size_t>& forbidden) {
          return apply_location_constraint(q, cells(forbidden, q.cols()));
        },
        py::arg("q"), py::arg("forbidden"));
  m.def("apply_sensing_constraint",
        [](const TrackingMatrix& q, const std::vector<std::size_t>& unmonitored) {
          return apply_sensing_constraint(q, cells(unmonitored, q.rows()));
        },
        py::arg("q"), py::arg("unmonitored"));
  m.def("volume_weight", &volume_weight, py::arg("q"), py::arg("grid"));

  py::class_<PlacementResult>(m, "PlacementResult")
      .def_readonly("sensor_cells", &PlacementResult::sensor_cells)
      .def_readonly("newly_covered", &PlacementResult::newly_covered)
      .def_readonly("scores", &PlacementResult::scores)
      .def_readonly("covered_fraction", &PlacementResult::covered_fraction)
      .def_readonly("uncovered", &PlacementResult::uncovered)
      .def_readonly("early_stop", &PlacementResult::early_stop);

  auto scenario = [](const TrackingMatrix& q, const std::optional<std::vector<std::size_t>>& rows) {
    return rows ? ReleaseScenario::from(CellSet(*rows, q.rows())) : ReleaseScenario::all(q.rows());
  };
  m.def(
      "greedy_place",
      [scenario](const TrackingMatrix& q, std::size_t p,
                 const std::optional<std::vector<std::size_t>>& releases) {
        return greedy_place(q, p, scenario(q, releases));
      },
      py::arg("q"), py::arg("p"), py::arg("releases") = py::none());
  m.def(
      "brute_force_place",
      [scenario](const TrackingMatrix& q, std::size_t p,
                 const std::optional<std::vector<std::size_t>>& releases) {
        return brute_force_place(q, p, scenario(q, releases));
      },
      py::arg("q"), py::arg("p"), py::arg("releases") = py::none());
  m.def("placement_report", &placement_report, py::arg("result"), py::arg("grid"));

  py::class_<Realization>(m, "Realization")
      .def(py::init<std::string, VelocityField, double>(), py::arg("id"), py::arg("field"),
           py::arg("weight") = 1.0)
      .def_readonly("id", &Realization::id)
      .def_readonly("weight", &Realization::weight);

  py::class_<Ensemble>(m, "Ensemble")
      .def_property_readonly("size", [](const Ensemble& e) { return e.members.size(); })
      .def_property_readonly("ids",
                             [](const Ensemble& e) {
                               std::vector<std::string> ids;
                               for (const auto& mem : e.members) ids.push_back(mem.id);
                               return ids;
                             })
      .def("weights", &Ensemble::weights)
      .def_property_readonly("admissible", [](const Ensemble& e) { return e.admissible.indices(); })
      .def_property_readonly("forbidden", [](const Ensemble& e) { return e.forbidden.indices(); })
      .def("pattern", [](const Ensemble& e, std::size_t i) { return e.members.at(i).products.binary; },
           py::arg("member"));

  m.def(
      "build_ensemble",
      [](const std::vector<Realization>& r, const Grid& ref, double d, double dt, std::size_t steps,
         double eps, const std::string& preset, const std::vector<std::size_t>& occupied,
         unsigned threads) {
        PipelineParams params;
        params.diffusivity = d;
        params.dt_markov = dt;
        params.steps = steps;
        params.eps_acc = eps;
        params.threads = threads;
        const auto c = make_constraints(parse_constraint_preset(preset), CellSet(occupied, ref.size()));
        py::gil_scoped_release release;
        return build_ensemble(r, ref, params, c);
      },
      py::arg("realizations"), py::arg("ref_grid"), py::arg("diffusivity"), py::arg("dt_markov"),
      py::arg("steps"), py::arg("eps_acc") = 1e-4, py::arg("preset") = "none",
      py::arg("occupied") = std::vector<std::size_t>{}, py::arg("threads") = 0);
  m.def(
      "load_manifest",
      [](const std::filesystem::path& path, unsigned threads) {
        auto loaded = resolve_manifest(load_manifest(path));
        loaded.params.threads = threads;
        Ensemble e = build_ensemble(loaded.realizations, loaded.ref_grid, loaded.params,
                                    loaded.constraints);
        return py::make_tuple(std::move(e), loaded.sensors);
      },
      py::arg("path"), py::arg("threads") = 0,
      "Builds the ensemble described by a manifest; returns (ensemble, sensors).");
  m.def(
      "ensemble_place",
      [](const Ensemble& e, std::size_t p) {
        auto r = ensemble_place(e, p);
        return py::make_tuple(r.result, r.expectations);
      },
      py::arg("ensemble"), py::arg("p"), "Returns (result, per-round expectation vectors).");
  m.def(
      "probable_coverage_map",
      [](const Ensemble& e, const std::vector<std::size_t>& sensors) {
        return to_array(probable_coverage_map(sensors, e.binary_set(), e.weights()));
      },
      py::arg("ensemble"), py::arg("sensors"));
  m.def(
      "expected_coverage_fraction",
      [](const Ensemble& e, const std::vector<std::size_t>& sensors) {
        return expected_coverage_fraction(sensors, e.binary_set(), e.weights(), e.ref_grid,
                                          e.admissible);
      },
      py::arg("ensemble"), py::arg("sensors"));
  m.def(
      "volume_weighted_mean",
      [](const Ensemble& e, const Array& map) {
        return volume_weighted_mean(std::span<const double>(map.data(), map.size()), e.ref_grid,
                                    e.admissible);
      },
      py::arg("ensemble"), py::arg("map"));
  m.def(
      "coverage_csv",
      [](const Array& map, const Grid& g) {
        return coverage_csv(std::span<const double>(map.data(), map.size()), g);
      },
      py::arg("map"), py::arg("grid"));
  m.def(
      "coverage_pgm",
      [](const Array& map, const Grid& g) {
        return py::bytes(coverage_pgm(std::span<const double>(map.data(), map.size()), g));
      },
      py::arg("map"), py::arg("grid"));
}
