#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ecselect/error.hpp"
#include "ecselect/evalpipe.hpp"
#include "ecselect/icec.hpp"
#include "ecselect/mvar.hpp"
#include "ecselect/signal.hpp"
#include "ecselect/spectral.hpp"
#include "ecselect/synth.hpp"

namespace py = pybind11;
using namespace ecselect;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

EpochSet epochs_from_array(const Array& data, double fs,
                           std::optional<std::vector<std::string>> names,
                           std::optional<std::vector<int>> labels) {
  if (data.ndim() != 3) throw ConfigError("epoch data must be (trials, channels, samples)");
  const auto n_t = static_cast<std::size_t>(data.shape(0));
  const auto n_c = static_cast<std::size_t>(data.shape(1));
  const auto n_s = static_cast<std::size_t>(data.shape(2));
  std::vector<std::string> channel_names;
  if (names) {
    channel_names = *names;
  } else {
    for (std::size_t c = 0; c < n_c; ++c) channel_names.push_back("X" + std::to_string(c + 1));
  }
  if (channel_names.size() != n_c) throw ConfigError("channel_names length must match channels");
  std::vector<double> buf(data.data(), data.data() + data.size());
  return EpochSet(std::move(buf), n_t, make_channels(channel_names), n_s, fs, std::move(labels));
}

Array epochs_to_array(const EpochSet& e) {
  Array out({e.n_trials(), e.n_channels(), e.n_samples()});
  std::copy(e.data().begin(), e.data().end(), out.mutable_data());
  return out;
}

Array spectrum_to_array(const MetricSpectrum& s) {
  const std::size_t f = s.size();
  const std::size_t k = f ? static_cast<std::size_t>(s[0].rows()) : 0;
  Array out({f, k, k});
  auto r = out.mutable_unchecked<3>();
  for (std::size_t fi = 0; fi < f; ++fi) {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        r(fi, i, j) = s[fi](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
    }
  }
  return out;
}

py::dict report_dict(const IcecReport& r) {
  py::dict d;
  d["raw"] = r.raw;
  d["normalized"] = r.normalized;
  d["ranking"] = r.ranking;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Effective-connectivity EEG channel selection core";

  auto base = py::register_exception<Error>(m, "EcselectError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

  py::class_<EpochSet>(m, "EpochSet")
      .def(py::init(&epochs_from_array), py::arg("data"), py::arg("fs"),
           py::arg("channel_names") = py::none(), py::arg("labels") = py::none())
      .def_property_readonly("data", &epochs_to_array)
      .def_property_readonly("fs", &EpochSet::fs)
      .def_property_readonly("channel_names", &EpochSet::channel_names)
      .def_property_readonly("labels", [](const EpochSet& e) { return e.labels(); })
      .def_property_readonly("shape", [](const EpochSet& e) {
        return py::make_tuple(e.n_trials(), e.n_channels(), e.n_samples());
      });

  m.def("load_epochs", [](const std::filesystem::path& p) {
    return load_epochs(p, format_from_path(p));
  });
  m.def("save_epochs", [](const EpochSet& e, const std::filesystem::path& p) {
    save_epochs(e, p, format_from_path(p));
  });
  m.def("bandpass_filter", [](const EpochSet& e, double lo, double hi, int order) {
    return bandpass_filter(e, BandSpec{lo, hi, "band"}, order);
  }, py::arg("epochs"), py::arg("f_low"), py::arg("f_high"), py::arg("order") = 5);
  m.def("ensemble_normalize", &ensemble_normalize);

  py::class_<VarModel>(m, "VarModel")
      .def(py::init([](std::vector<Eigen::MatrixXd> coeffs, Eigen::MatrixXd noise_cov, double fs) {
             VarModel v;
             v.order = static_cast<int>(coeffs.size());
             v.coeffs = std::move(coeffs);
             v.noise_cov = std::move(noise_cov);
             v.fs = fs;
             v.validate();
             return v;
           }),
           py::arg("coeffs"), py::arg("noise_cov"), py::arg("fs") = 1.0)
      .def_readonly("order", &VarModel::order)
      .def_readonly("coeffs", &VarModel::coeffs)
      .def_readonly("noise_cov", &VarModel::noise_cov)
      .def_readonly("fs", &VarModel::fs)
      .def("aic", &aic)
      .def("stability", [](const VarModel& v) {
        const StabilityResult s = stability_check(v);
        return py::make_tuple(s.stable, s.max_modulus);
      })
      .def("process_covariance", [](const VarModel& v) { return process_covariance(v).r; });

  m.def("fit_var", [](const EpochSet& e, int order) { return fit_vieira_morf(e, order); },
        py::arg("epochs"), py::arg("order"));
  m.def("select_order", [](const EpochSet& e, const std::vector<int>& orders) {
    const OrderSelection s = select_order(e, orders);
    py::dict d;
    d["chosen"] = s.chosen;
    d["orders"] = s.candidate_orders;
    d["aic"] = s.aic_values;
    return d;
  });
  m.def("simulate_var", &simulate_var, py::arg("model"), py::arg("n_trials"),
        py::arg("n_samples"), py::arg("seed") = 0, py::arg("burn_in") = 0);

  m.def("metric_spectrum", [](const VarModel& v, const std::string& metric,
                              const std::vector<double>& freqs) {
    const SpectralMatrices spec = evaluate_spectrum(v, FrequencyGrid{freqs});
    return spectrum_to_array(metric_spectrum(parse_metric(metric), v, spec));
  }, py::arg("model"), py::arg("metric"), py::arg("freqs"));

  m.def("load_tensor", [](const std::filesystem::path& p) {
    const ConnectivityTensor t = load_tensor(p);
    Array values({t.n_channels, t.n_channels, t.n_freqs, t.n_windows});
    std::copy(t.values.begin(), t.values.end(), values.mutable_data());
    py::dict d;
    d["metric"] = metric_name(t.metric);
    d["values"] = values;
    d["freqs"] = t.grid.freqs;
    d["valid_windows"] = std::vector<bool>(t.valid_windows.begin(), t.valid_windows.end());
    d["channel_names"] = t.channel_names;
    return d;
  });

  m.def("icec", [](const Eigen::MatrixXd& c, double top_fraction, const std::string& direction) {
    return report_dict(icec(CollapsedMatrix{c}, top_fraction, parse_direction(direction)));
  }, py::arg("c"), py::arg("top_fraction") = 0.3, py::arg("direction") = "to");
  m.def("band_presets", [] {
    std::vector<py::tuple> out;
    for (const BandSpec& b : band_presets()) out.push_back(py::make_tuple(b.name, b.f_low, b.f_high));
    return out;
  });

  m.def("gen_labeled_csp_dataset", [](std::size_t n_channels, std::vector<std::size_t> informative,
                                      double variance_ratio, std::size_t n_trials_per_class,
                                      std::size_t n_samples, std::uint64_t seed, bool route) {
    LabeledDatasetSpec s;
    s.n_channels = n_channels;
    s.informative = std::move(informative);
    s.variance_ratio = variance_ratio;
    s.n_trials_per_class = n_trials_per_class;
    s.n_samples = n_samples;
    s.seed = seed;
    s.route_through_var = route;
    return gen_labeled_csp_dataset(s);
  }, py::arg("n_channels"), py::arg("informative"), py::arg("variance_ratio") = 4.0,
     py::arg("n_trials_per_class") = 100, py::arg("n_samples") = 500, py::arg("seed") = 0,
     py::arg("route_through_var") = false);

  m.def("evaluate_channels", [](const EpochSet& train, const EpochSet& test,
                                const std::vector<std::size_t>& channels, int n_pairs, double c) {
    EvalOptions opts;
    opts.n_pairs = n_pairs;
    opts.svm.c = c;
    const EpochSet tr = bandpass_filter(train, opts.band, opts.filter_order);
    const EpochSet te = bandpass_filter(test, opts.band, opts.filter_order);
    const EvalCell cell = evaluate_channels(tr, te, channels, opts);
    py::dict d;
    d["train_acc"] = cell.train_acc;
    d["test_acc"] = cell.test_acc;
    d["flags"] = cell.flags;
    return d;
  }, py::arg("train"), py::arg("test"), py::arg("channels"), py::arg("n_pairs") = 3,
     py::arg("c") = 1.0);
}
