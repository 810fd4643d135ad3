// Python bindings for the core library. Arrays cross the boundary as
// float64 numpy arrays (copied); configs cross as JSON text.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <optional>
#include <string>
#include <vector>

#include "tmaf/activations.hpp"
#include "tmaf/error.hpp"
#include "tmaf/gradcheck.hpp"
#include "tmaf/harness.hpp"
#include "tmaf/mnist.hpp"
#include "tmaf/network.hpp"
#include "tmaf/optim.hpp"
#include "tmaf/stepfn.hpp"

namespace py = pybind11;
using namespace tmaf;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using LabelArray = py::array_t<int, py::array::c_style | py::array::forcecast>;

Batch to_batch(const Array& a) {
  if (a.ndim() == 1) {
    // A 1-D array is a batch of scalar samples.
    return Batch(static_cast<std::size_t>(a.shape(0)), 1,
                 std::vector<double>(a.data(), a.data() + a.size()));
  }
  if (a.ndim() != 2) throw DimensionError("expected a 1-D or 2-D array, got " + std::to_string(a.ndim()) + "-D");
  return Batch(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)),
               std::vector<double>(a.data(), a.data() + a.size()));
}

py::array_t<double> to_array(const Batch& m) {
  py::array_t<double> out({m.rows(), m.cols()});
  if (m.size() > 0) std::memcpy(out.mutable_data(), m.data().data(), m.size() * sizeof(double));
  return out;
}

py::array_t<double> to_array(std::span<const double> v) {
  py::array_t<double> out(v.size());
  if (!v.empty()) std::memcpy(out.mutable_data(), v.data(), v.size() * sizeof(double));
  return out;
}

std::vector<int> to_labels(const LabelArray& a) {
  return std::vector<int>(a.data(), a.data() + a.size());
}

py::dict params_dict(ParamList params, bool grads) {
  py::dict out;
  for (const auto& block : params) {
    out[py::str(block.name)] = to_array(grads ? block.grads : block.values);
  }
  return out;
}

void assign_params(ParamList params, const py::dict& values) {
  for (auto& block : params) {
    if (!values.contains(block.name)) continue;
    const Array a = values[py::str(block.name)].cast<Array>();
    if (static_cast<std::size_t>(a.size()) != block.values.size()) {
      throw DimensionError("parameter '" + block.name + "' has " + std::to_string(block.values.size()) +
                           " entries, got " + std::to_string(a.size()));
    }
    std::memcpy(block.values.data(), a.data(), block.values.size() * sizeof(double));
  }
}

/// Activation op plus the cache of its most recent forward call.
class PyActivation {
 public:
  explicit PyActivation(ActivationOp op) : op_(std::move(op)) {}

  py::array_t<double> forward(const Array& y) {
    auto [out, cache] = op_.forward(to_batch(y));
    cache_ = std::move(cache);
    return to_array(out);
  }

  py::array_t<double> backward(const Array& upstream) {
    if (!cache_) throw Error("backward called before forward");
    return to_array(op_.backward(*cache_, to_batch(upstream)));
  }

  void zero_grads() { op_.zero_grads(); }
  py::dict params() { return params_dict(op_.collect_params(), false); }
  py::dict grads() { return params_dict(op_.collect_params(), true); }
  void set_params(const py::dict& values) { assign_params(op_.collect_params(), values); }

 private:
  ActivationOp op_;
  std::optional<ActivationCache> cache_;
};

StepFunction step_from(const std::vector<double>& breakpoints, const std::optional<std::vector<double>>& values,
                       double fill) {
  if (values) return StepFunction(breakpoints, *values);
  return StepFunction::constant(breakpoints, fill);
}

py::dict report_dict(const GradcheckReport& r) {
  py::list classes;
  for (const auto& c : r.classes) {
    py::dict d;
    d["name"] = c.name;
    d["count"] = c.count;
    d["max_rel_error"] = c.max_rel_error;
    d["worst"] = c.worst;
    classes.append(d);
  }
  py::dict out;
  out["passed"] = r.passed;
  out["max_rel_error"] = r.max_rel_error;
  out["tolerance"] = r.tolerance;
  out["classes"] = classes;
  out["text"] = r.to_text();
  return out;
}

py::tuple loss_tuple(const LossResult& r) { return py::make_tuple(r.loss, to_array(r.grad)); }

}  // namespace

PYBIND11_MODULE(_tmaf, m) {
  m.doc() = "Trainable matrix activation functions (native core)";

  static py::exception<Error> base(m, "TmafError", PyExc_RuntimeError);
  static py::exception<DimensionError> dimension(m, "DimensionError", base.ptr());
  static py::exception<NumericError> numeric(m, "NumericError", base.ptr());
  static py::exception<ConfigError> config(m, "ConfigError", base.ptr());
  static py::exception<ModelFormatError> model_format(m, "ModelFormatError", base.ptr());
  static py::exception<IdxError> idx(m, "IdxError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const DimensionError& e) {
      py::set_error(dimension, e.what());
    } catch (const NumericError& e) {
      py::set_error(numeric, e.what());
    } catch (const ConfigError& e) {
      py::set_error(config, e.what());
    } catch (const ModelFormatError& e) {
      py::set_error(model_format, e.what());
    } catch (const IdxError& e) {
      py::set_error(idx, e.what());
    } catch (const Error& e) {
      py::set_error(base, e.what());
    }
  });

  m.def("gaussian_decile_breakpoints", &gaussian_decile_breakpoints);
  m.def("uniform_grid_breakpoints", &uniform_grid_breakpoints, py::arg("lo"), py::arg("hi"), py::arg("k"));

  py::class_<StepFunction>(m, "StepFunction")
      .def(py::init([](std::vector<double> breakpoints, std::vector<double> values) {
             return StepFunction(std::move(breakpoints), std::move(values));
           }),
           py::arg("breakpoints"), py::arg("values"))
      .def_static("relu_like", &StepFunction::relu_like, py::arg("breakpoints"))
      .def("__call__", &StepFunction::eval, py::arg("s"))
      .def("locate", [](const StepFunction& f, double s) { return f.locate(s).j; }, py::arg("s"),
           "Index of the interval containing s (intervals are closed on the right).")
      .def_property_readonly("breakpoints",
                             [](const StepFunction& f) { return std::vector<double>(f.breakpoints().begin(), f.breakpoints().end()); })
      .def_property_readonly("values",
                             [](const StepFunction& f) { return std::vector<double>(f.values().begin(), f.values().end()); })
      .def_property_readonly("interval_count", &StepFunction::interval_count);

  py::class_<PyActivation>(m, "Activation")
      .def("forward", &PyActivation::forward, py::arg("y"))
      .def("backward", &PyActivation::backward, py::arg("upstream"),
           "Input gradient for the last forward call; parameter gradients accumulate.")
      .def("zero_grads", &PyActivation::zero_grads)
      .def("params", &PyActivation::params)
      .def("grads", &PyActivation::grads)
      .def("set_params", &PyActivation::set_params, py::arg("values"));

  m.def("relu", [](std::size_t width) { return PyActivation(ActivationOp::relu(width)); }, py::arg("width"));
  m.def("leaky_relu", [](std::size_t width, double slope) { return PyActivation(ActivationOp::leaky_relu(width, slope)); },
        py::arg("width"), py::arg("slope") = 0.01);
  m.def("prelu", [](std::size_t width, double slope) { return PyActivation(ActivationOp::prelu(width, slope)); },
        py::arg("width"), py::arg("initial_slope") = 0.25);
  m.def(
      "diag_tmaf",
      [](std::size_t width, std::vector<double> breakpoints, std::optional<std::vector<double>> values,
         bool per_neuron) {
        StepFunction alpha = values ? StepFunction(breakpoints, *values) : StepFunction::relu_like(breakpoints);
        return PyActivation(ActivationOp::diag_tmaf(width, std::move(alpha), per_neuron));
      },
      py::arg("width"), py::arg("breakpoints"), py::arg("values") = py::none(), py::arg("per_neuron") = false,
      "Diagonal TMAF; without values the step function starts equal to ReLU.");
  m.def(
      "tridiag_tmaf",
      [](std::size_t width, std::vector<double> alpha_breakpoints, std::optional<std::vector<double>> alpha_values,
         std::vector<double> beta_breakpoints, std::optional<std::vector<double>> beta_values,
         std::vector<double> gamma_breakpoints, std::optional<std::vector<double>> gamma_values, bool per_neuron) {
        StepFunction alpha = alpha_values ? StepFunction(alpha_breakpoints, *alpha_values)
                                          : StepFunction::relu_like(alpha_breakpoints);
        return PyActivation(ActivationOp::tridiag_tmaf(width, std::move(alpha),
                                                       step_from(beta_breakpoints, beta_values, 0.0),
                                                       step_from(gamma_breakpoints, gamma_values, 0.0), per_neuron));
      },
      py::arg("width"), py::arg("alpha_breakpoints"), py::arg("alpha_values") = py::none(),
      py::arg("beta_breakpoints"), py::arg("beta_values") = py::none(), py::arg("gamma_breakpoints"),
      py::arg("gamma_values") = py::none(), py::arg("per_neuron") = false);

  m.def("mse_loss", [](const Array& pred, const Array& target) { return loss_tuple(mse_loss(to_batch(pred), to_batch(target))); },
        py::arg("prediction"), py::arg("target"), "Returns (loss, gradient).");
  m.def(
      "cross_entropy_loss",
      [](const Array& logits, const LabelArray& labels) {
        return loss_tuple(cross_entropy_loss(to_batch(logits), to_labels(labels)));
      },
      py::arg("logits"), py::arg("labels"), "Labels are classes 1..M. Returns (loss, gradient).");
  m.def("top1_accuracy",
        [](const Array& logits, const LabelArray& labels) { return top1_accuracy(to_batch(logits), to_labels(labels)); },
        py::arg("logits"), py::arg("labels"));

  py::class_<Network>(m, "Network")
      .def(py::init([](const std::string& spec_json, std::uint64_t seed) {
             Rng rng = Rng::derive(seed, streams::kInit);
             return Network(network_spec_from_json_string(spec_json), rng);
           }),
           py::arg("spec_json"), py::arg("seed") = 0)
      .def_property_readonly("spec_json", [](const Network& n) { return to_json_string(n.spec()); })
      .def_property_readonly("input_dim", &Network::input_dim)
      .def_property_readonly("output_dim", &Network::output_dim)
      .def("param_count", &Network::param_count)
      .def("predict", [](Network& n, const Array& x) { return to_array(n.predict(to_batch(x))); }, py::arg("x"),
           "Eval-mode forward pass.")
      .def(
          "gradients",
          [](Network& n, const Array& x, const py::object& target) {
            const Batch input = to_batch(x);
            auto [out, tape] = n.forward(input, Mode::kTrain);
            const py::array t = py::array::ensure(target);
            const char dtype = t.dtype().kind();
            const LossResult loss = dtype == 'i' || dtype == 'u'
                                        ? cross_entropy_loss(out, to_labels(target.cast<LabelArray>()))
                                        : mse_loss(out, to_batch(target.cast<Array>()));
            n.zero_grads();
            n.backward(std::move(tape), loss.grad);
            return py::make_tuple(loss.loss, params_dict(n.collect_params(), true));
          },
          py::arg("x"), py::arg("target"),
          "Train-mode loss and parameter gradients. Integer targets select cross-entropy, float targets MSE.")
      .def("params", [](Network& n) { return params_dict(n.collect_params(), false); })
      .def("set_params", [](Network& n, const py::dict& v) { assign_params(n.collect_params(), v); }, py::arg("values"))
      .def("save", [](Network& n, const std::string& path) { save_model(n, path); }, py::arg("path"))
      .def_static("load", &load_model, py::arg("path"))
      .def("to_bytes", [](Network& n) {
        const auto bytes = encode_model(n);
        return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
      })
      .def_static("from_bytes", [](const py::bytes& b) {
        const std::string s = b;
        return decode_model(std::vector<std::uint8_t>(s.begin(), s.end()));
      });

  m.def(
      "check_gradients",
      [](Network& n, const Array& x, const Array& target, double step, double tolerance) {
        const Batch t = to_batch(target);
        GradcheckOptions opts;
        opts.step = step;
        opts.tolerance = tolerance;
        return report_dict(check_gradients(n, to_batch(x), [&](const Batch& p) { return mse_loss(p, t); }, opts));
      },
      py::arg("network"), py::arg("x"), py::arg("target"), py::arg("step") = 1e-5, py::arg("tolerance") = 1e-6,
      "Central-difference check of every gradient under an MSE loss.");

  m.def(
      "default_config",
      [](const std::string& experiment) {
        for (auto k : {ExperimentKind::kSine, ExperimentKind::kOscillatory, ExperimentKind::kMnist,
                       ExperimentKind::kCustomCsv}) {
          if (experiment == to_string(k)) return to_json_string(default_config(k));
        }
        throw ConfigError({"unknown experiment '" + experiment + "'"});
      },
      py::arg("experiment"));
  m.def("resolve_config", [](const std::string& json) { return to_json_string(parse_experiment_config(json)); },
        py::arg("config_json"), "Parses, validates and fills defaults.");
  m.def(
      "train",
      [](const std::string& json) {
        const ExperimentConfig cfg = parse_experiment_config(json);
        TrainResult result;
        {
          py::gil_scoped_release release;
          result = run_train(cfg);
        }
        py::list rows;
        for (const auto& r : result.rows) {
          py::dict d;
          d["epoch"] = r.epoch;
          d["train_loss"] = r.train_loss;
          d["eval_metric"] = r.eval_metric;
          d["learning_rate"] = r.learning_rate;
          d["wall_seconds"] = r.wall_seconds;
          rows.append(d);
        }
        return rows;
      },
      py::arg("config_json"), "Runs training and writes the run artifacts; returns the metrics rows.");
  m.def(
      "evaluate",
      [](const std::string& model_path, const std::string& json, bool train_split) {
        return run_eval(model_path, parse_experiment_config(json), train_split ? EvalSplit::kTrain : EvalSplit::kHeldout);
      },
      py::arg("model_path"), py::arg("config_json"), py::arg("train_split") = false);
  m.def(
      "gradcheck",
      [](const std::string& json, double tolerance) {
        GradcheckRunOptions opts;
        opts.tolerance = tolerance;
        return report_dict(run_gradcheck(parse_experiment_config(json), opts));
      },
      py::arg("config_json"), py::arg("tolerance") = 1e-6);

  m.def(
      "load_mnist",
      [](const std::string& images, const std::string& labels) {
        const MnistSet set = load_mnist(images, labels);
        LabelArray l(static_cast<py::ssize_t>(set.labels.size()));
        std::copy(set.labels.begin(), set.labels.end(), l.mutable_data());
        return py::make_tuple(to_array(set.images), l);
      },
      py::arg("images_path"), py::arg("labels_path"),
      "Returns (images n x 784 in [0, 1], labels 1..10).");
}
