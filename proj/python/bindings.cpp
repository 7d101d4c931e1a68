// Copyright 2026 The cogcl Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "cogcl/checkpoint.hpp"
#include "cogcl/cli.hpp"
#include "cogcl/data.hpp"
#include "cogcl/quantizer.hpp"
#include "cogcl/trainer.hpp"

namespace py = pybind11;

namespace {

py::dict default_config() {
  py::dict out;
  for (const auto& [k, v] : cogcl::trainer::config_items(cogcl::trainer::TrainConfig{})) out[py::str(k)] = v;
  return out;
}

py::dict dataset_stats(const std::string& dir) {
  const auto s = cogcl::data::dataset_stats(cogcl::data::load_dataset(dir));
  py::dict out;
  out["users"] = s.users;
  out["items"] = s.items;
  out["interactions"] = s.interactions;
  out["sparsity"] = s.sparsity;
  return out;
}

py::tuple read_checkpoint(const std::string& path) {
  const auto ck = cogcl::read_checkpoint(path);
  py::dict params;
  for (const auto& e : ck.store.entries()) params[py::str(e.name)] = e.value;
  return py::make_tuple(ck.meta.dump(), params);
}

cogcl::IndexMat assign_codes(const cogcl::Mat<double>& z, const std::vector<cogcl::Mat<double>>& books,
                             const std::string& scheme, double tau) {
  cogcl::quantizer::QuantizerConfig cfg;
  cfg.scheme = cogcl::quantizer::parse_scheme(scheme);
  cfg.levels = static_cast<int>(books.size());
  cfg.codebook_size = books.empty() ? 0 : static_cast<int>(books.front().rows());
  cfg.tau = tau;
  cfg.validate(static_cast<int>(z.cols()));
  std::vector<const cogcl::Mat<double>*> ptrs;
  for (const auto& b : books) ptrs.push_back(&b);
  return cogcl::quantizer::assign_codes<double>(z, ptrs, cfg).codes;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "CoGCL recommender engine";

  py::register_exception<cogcl::Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<cogcl::UsageError>(m, "UsageError", PyExc_ValueError);

  m.def("run_cli", py::overload_cast<const std::vector<std::string>&>(&cogcl::cli::run), py::arg("args"),
        "Runs one CLI invocation and returns its exit code.");
  m.def("default_config", &default_config, "Every config key with its default value as text.");
  m.def("dataset_stats", &dataset_stats, py::arg("dir"));
  m.def("read_checkpoint", &read_checkpoint, py::arg("path"), "Returns (meta_json, {name: array}).");
  m.def("assign_codes", &assign_codes, py::arg("z"), py::arg("codebooks"), py::arg("scheme") = "rq",
        py::arg("tau") = 0.2, "Cosine nearest-codeword assignment, one column per level.");
}
