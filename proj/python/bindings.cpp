#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "shuttle3d/benchmark.hpp"
#include "shuttle3d/court_detection.hpp"
#include "shuttle3d/errors.hpp"
#include "shuttle3d/geometry.hpp"
#include "shuttle3d/hit_segmentation.hpp"
#include "shuttle3d/image.hpp"
#include "shuttle3d/physics.hpp"
#include "shuttle3d/reconstruction.hpp"

namespace py = pybind11;
using namespace shuttle3d;

namespace {

using Rows3 = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using Rows2 = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;

py::tuple path_arrays(const physics::FlightPath& path) {
  Eigen::VectorXd t(static_cast<Eigen::Index>(path.samples.size()));
  Rows3 pos(static_cast<Eigen::Index>(path.samples.size()), 3);
  for (std::size_t i = 0; i < path.samples.size(); ++i) {
    t[static_cast<Eigen::Index>(i)] = path.samples[i].t;
    pos.row(static_cast<Eigen::Index>(i)) = path.samples[i].pos.transpose();
  }
  return py::make_tuple(t, pos);
}

hits::ScoreSequence score_sequence(const Rows3& scores, double fps, int first_frame) {
  hits::ScoreSequence s;
  s.fps = fps;
  s.first_frame = first_frame;
  for (Eigen::Index i = 0; i < scores.rows(); ++i)
    s.scores.push_back({scores(i, 0), scores(i, 1), scores(i, 2)});
  return s;
}

py::list hit_tuples(const hits::HitList& list) {
  py::list out;
  for (const auto& h : list) out.append(py::make_tuple(h.frame, geometry::to_string(h.player)));
  return out;
}

hits::HitList hit_list(const std::vector<std::pair<int, std::string>>& in) {
  hits::HitList out;
  for (const auto& [f, p] : in) out.push_back({f, geometry::player_from_string(p)});
  return out;
}

court::RgbImage rgb_from_array(const py::array_t<std::uint8_t, py::array::c_style>& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw InvalidInput("image must have shape (H, W, 3)");
  court::RgbImage img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  std::copy(a.data(), a.data() + a.size(), img.data.begin());
  return img;
}

}  // namespace

PYBIND11_MODULE(_shuttle3d, m) {
  m.doc() = "Monocular 3D shuttlecock trajectory reconstruction";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

  py::class_<physics::InitialConditions>(m, "InitialConditions")
      .def(py::init([](const Eigen::Vector3d& x0, const Eigen::Vector3d& v0, double cd) {
             physics::InitialConditions ic;
             ic.x0 = x0;
             ic.v0 = v0;
             ic.cd = cd;
             return ic;
           }),
           py::arg("x0"), py::arg("v0"), py::arg("cd") = physics::kDefaultDragCoefficient)
      .def_readwrite("x0", &physics::InitialConditions::x0)
      .def_readwrite("v0", &physics::InitialConditions::v0)
      .def_readwrite("cd", &physics::InitialConditions::cd)
      .def("__repr__", [](const physics::InitialConditions& ic) {
        return "InitialConditions(x0=[" + std::to_string(ic.x0.x()) + ", " +
               std::to_string(ic.x0.y()) + ", " + std::to_string(ic.x0.z()) + "], v0=[" +
               std::to_string(ic.v0.x()) + ", " + std::to_string(ic.v0.y()) + ", " +
               std::to_string(ic.v0.z()) + "], cd=" + std::to_string(ic.cd) + ")";
      });

  m.def("integrate",
        [](const physics::InitialConditions& ic, double duration, double dt) {
          return path_arrays(physics::integrate(ic, duration, dt));
        },
        py::arg("ic"), py::arg("duration"), py::arg("dt") = 1e-3,
        "Returns (t, positions) with positions of shape (N, 3).");
  m.def("landing",
        [](const physics::InitialConditions& ic, double dt) {
          const auto l = physics::extend_to_ground(ic, dt);
          return py::make_tuple(Eigen::Vector3d(l.point), l.time, l.out_distance);
        },
        py::arg("ic"), py::arg("dt") = 1e-3, "Returns (point, time, out_of_court_distance).");
  m.def("out_of_court_distance",
        [](const Eigen::Vector3d& p) { return physics::out_of_court_distance(p); });

  py::class_<geometry::CameraModel>(m, "CameraModel")
      .def(py::init<const geometry::Matrix34&>(), py::arg("P"))
      .def_property_readonly("P", &geometry::CameraModel::matrix)
      .def("project", [](const geometry::CameraModel& c, const Eigen::Vector3d& p) {
        return Eigen::Vector2d(c.project(p));
      });
  m.def("look_at_camera",
        [](const Eigen::Vector3d& eye, const Eigen::Vector3d& target, double focal_px, int width,
           int height, double roll_deg) {
          bench::CameraSpec s;
          s.eye = eye;
          s.target = target;
          s.focal_px = focal_px;
          s.width = width;
          s.height = height;
          s.roll_deg = roll_deg;
          return bench::look_at_camera(s);
        },
        py::arg("eye"), py::arg("target"), py::arg("focal_px") = 1000.0,
        py::arg("width") = 1920, py::arg("height") = 1080, py::arg("roll_deg") = 0.0);
  m.def("court_reference_points",
        [](double pole_height) {
          const auto refs = geometry::standard_court_model(pole_height).reference_points();
          Rows3 out(6, 3);
          for (int i = 0; i < 6; ++i) out.row(i) = refs[static_cast<std::size_t>(i)].transpose();
          return out;
        },
        py::arg("pole_height") = geometry::kDefaultPoleHeight,
        "Four court corners followed by the two pole tips, shape (6, 3).");
  m.def("calibrate_dlt",
        [](const Rows3& world, const Rows2& image) {
          if (world.rows() != image.rows()) throw InvalidInput("world and image row counts differ");
          std::vector<geometry::Correspondence> pairs;
          for (Eigen::Index i = 0; i < world.rows(); ++i)
            pairs.push_back({world.row(i).transpose(), image.row(i).transpose()});
          return geometry::calibrate_dlt(pairs);
        },
        py::arg("world"), py::arg("image"));

  m.def("reconstruct_shot",
        [](const geometry::CameraModel& camera, const Rows2& uv, const std::vector<bool>& visible,
           int first_frame, double fps, int hit_frame, int receive_frame, const std::string& hitter,
           const Eigen::Vector3d& x_hit, const Eigen::Vector3d& x_receive,
           const std::string& loss, int multistart_count, std::uint64_t seed) {
          if (static_cast<std::size_t>(uv.rows()) != visible.size())
            throw InvalidInput("uv and visible lengths differ");
          recon::ShotObservation shot;
          shot.track.fps = fps;
          for (Eigen::Index i = 0; i < uv.rows(); ++i)
            shot.track.entries.push_back({first_frame + static_cast<int>(i), uv(i, 0), uv(i, 1),
                                          visible[static_cast<std::size_t>(i)]});
          shot.hit_frame = hit_frame;
          shot.receive_frame = receive_frame;
          shot.hitter = geometry::player_from_string(hitter);
          shot.x_hit = x_hit;
          shot.x_receive = x_receive;
          recon::ReconstructionConfig cfg;
          cfg.loss_mode = recon::loss_mode_from_string(loss);
          cfg.multistart_count = multistart_count;
          cfg.seed = seed;
          const auto r = recon::reconstruct_shot(camera, shot, cfg);
          py::dict out;
          out["ic"] = r.ic;
          out["loss_total"] = r.loss_total;
          out["loss_reprojection"] = r.loss_reprojection;
          out["converged"] = r.converged;
          out["iterations"] = r.iterations;
          const auto arrays = path_arrays(r.path);
          out["t"] = arrays[0];
          out["path"] = arrays[1];
          return out;
        },
        py::arg("camera"), py::arg("uv"), py::arg("visible"), py::arg("first_frame"),
        py::arg("fps"), py::arg("hit_frame"), py::arg("receive_frame"), py::arg("hitter"),
        py::arg("x_hit"), py::arg("x_receive"), py::arg("loss") = "full",
        py::arg("multistart_count") = 8, py::arg("seed") = 0);

  m.def("optimize_hits",
        [](const Rows3& scores, double fps, int first_frame) {
          const auto r = hits::optimize_hits(score_sequence(scores, fps, first_frame));
          return py::make_tuple(hit_tuples(r.hits), r.objective);
        },
        py::arg("scores"), py::arg("fps"), py::arg("first_frame") = 0,
        "Scores have shape (F, 3): no hit, near, far. Returns (hits, objective).");
  m.def("naive_postprocess",
        [](const Rows3& scores, double fps, int first_frame) {
          return hit_tuples(hits::naive_postprocess(score_sequence(scores, fps, first_frame)));
        },
        py::arg("scores"), py::arg("fps"), py::arg("first_frame") = 0);
  m.def("hit_metrics",
        [](const std::vector<std::pair<int, std::string>>& truth,
           const std::vector<std::pair<int, std::string>>& predicted, int tolerance) {
          const auto h = hits::hit_metrics(hit_list(truth), hit_list(predicted), tolerance);
          py::dict out;
          out["matched"] = h.matched;
          out["accuracy"] = h.accuracy;
          out["recall"] = h.recall;
          out["precision"] = h.precision;
          out["f1"] = h.f1;
          return out;
        },
        py::arg("truth"), py::arg("predicted"), py::arg("tolerance") = 0);

  m.def("render_court",
        [](const geometry::CameraModel& camera, int width, int height) {
          const auto img = court::render_court(camera, geometry::standard_court_model(), width,
                                               height);
          py::array_t<std::uint8_t> out({height, width, 3});
          std::copy(img.data.begin(), img.data.end(), out.mutable_data());
          return out;
        },
        py::arg("camera"), py::arg("width"), py::arg("height"));
  m.def("detect_court",
        [](const py::array_t<std::uint8_t, py::array::c_style>& image, const std::string& method) {
          court::DetectionConfig cfg;
          if (method == "farin") {
            cfg.method = court::PartitionMethod::farin;
          } else if (method != "graph") {
            throw InvalidInput("method must be 'graph' or 'farin'");
          }
          const auto d = court::detect_court(rgb_from_array(image), geometry::standard_court_model(), cfg);
          Rows2 corners(4, 2);
          for (int i = 0; i < 4; ++i) corners.row(i) = d.corners[static_cast<std::size_t>(i)].transpose();
          py::dict out;
          out["success"] = d.success;
          out["score"] = d.score;
          out["corners"] = corners;
          out["homography"] = Eigen::Matrix3d(d.homography.matrix());
          return out;
        },
        py::arg("image"), py::arg("method") = "graph");
  m.def("detection_iou", [](const Rows2& detected, const Rows2& truth) {
    if (detected.rows() != 4 || truth.rows() != 4) throw InvalidInput("expected 4 corners each");
    std::array<geometry::ImagePoint, 4> a, b;
    for (int i = 0; i < 4; ++i) {
      a[static_cast<std::size_t>(i)] = detected.row(i).transpose();
      b[static_cast<std::size_t>(i)] = truth.row(i).transpose();
    }
    return court::detection_iou(a, b);
  });
}
