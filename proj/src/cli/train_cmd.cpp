/*
 * Copyright 2026 The sttsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <fmt/format.h>

#include <algorithm>
#include <filesystem>
#include <set>
#include <sstream>

#include "common.hpp"
#include "sttsim/errortrain.hpp"
#include "sttsim/parallel.hpp"

namespace sttsim::cli {

namespace {

using errortrain::BufferErrorBinding;
using errortrain::SegmentErrorConfig;

struct Cell {
  std::string name;
  std::string segment;  // sign, exponent, mantissa or mixed
  double wer = 0.0;
  int bits = errortrain::kMantissaBits;
  std::vector<std::string> buffers;
  SegmentErrorConfig errors;

  BufferErrorBinding binding() const {
    BufferErrorBinding b;
    for (const auto& buf : buffers) {
      if (buf == "activations") b.activations = errors;
      if (buf == "weights") b.weights = errors;
      if (buf == "errors") b.errors = errors;
    }
    return b;
  }
};

const std::vector<std::string> kAllBuffers = {"activations", "weights", "errors"};

SegmentErrorConfig segment_config(const std::string& segment, double wer, int bits) {
  SegmentErrorConfig c;
  c.affected_mantissa_bits = bits;
  if (segment == "sign") c.sign_wer = wer;
  if (segment == "exponent") c.exponent_wer = wer;
  if (segment == "mantissa") c.mantissa_wer = wer;
  return c;
}

std::vector<std::string> parse_buffers(config::Section& s) {
  auto buffers = s.get_list<std::string>("buffers", kAllBuffers);
  for (const auto& b : buffers) {
    if (std::find(kAllBuffers.begin(), kAllBuffers.end(), b) == kAllBuffers.end()) {
      s.fail_key("buffers", "entries must be activations, weights or errors");
    }
  }
  return buffers;
}

void check_segment(config::Section& s, const std::string& key, const std::string& segment) {
  if (segment != "sign" && segment != "exponent" && segment != "mantissa") {
    s.fail_key(key, "must be sign, exponent or mantissa");
  }
}

std::string cell_name(const std::string& segment, double wer, int bits) {
  std::string w = num(wer);
  std::replace(w.begin(), w.end(), '-', 'm');
  return fmt::format("{}_{}_b{}", segment, w, bits);
}

std::vector<Cell> parse_cells(config::Section& root) {
  std::vector<Cell> cells;
  if (root.has("cells")) {
    for (auto& c : root.children("cells")) {
      Cell cell;
      cell.buffers = parse_buffers(c);
      cell.bits = c.get("bits", errortrain::kMantissaBits);
      if (c.has("segment")) {
        cell.segment = c.require<std::string>("segment");
        check_segment(c, "segment", cell.segment);
        cell.wer = c.require<double>("wer");
        cell.errors = segment_config(cell.segment, cell.wer, cell.bits);
        c.raw("sign_wer");
        c.raw("exponent_wer");
        c.raw("mantissa_wer");
      } else {
        c.raw("wer");
        cell.segment = "mixed";
        cell.errors.sign_wer = c.get("sign_wer", 0.0);
        cell.errors.exponent_wer = c.get("exponent_wer", 0.0);
        cell.errors.mantissa_wer = c.get("mantissa_wer", 0.0);
        cell.errors.affected_mantissa_bits = cell.bits;
        cell.wer = std::max({cell.errors.sign_wer, cell.errors.exponent_wer, cell.errors.mantissa_wer});
      }
      try {
        cell.errors.validate();
      } catch (const Error& e) {
        c.fail(e.what(), c.node());
      }
      cell.name = c.get("name", cell.segment == "mixed" ? fmt::format("cell{}", cells.size())
                                                        : cell_name(cell.segment, cell.wer, cell.bits));
      c.finish();
      cells.push_back(std::move(cell));
    }
  } else if (auto g = root.child("grid")) {
    const auto segments = g->get_list<std::string>("segments", {"mantissa", "exponent"});
    for (const auto& s : segments) check_segment(*g, "segments", s);
    const auto wers = g->get_list<double>("wers", {1e-3, 1e-2});
    const auto bits = g->get_list<int>("bits", {errortrain::kMantissaBits});
    const auto buffers = parse_buffers(*g);
    g->finish();
    for (const auto& s : segments) {
      for (double w : wers) {
        // Bit counts only apply to the mantissa segment.
        for (int b : s == "mantissa" ? bits : std::vector<int>{errortrain::kMantissaBits}) {
          Cell cell{cell_name(s, w, b), s, w, b, buffers, segment_config(s, w, b)};
          try {
            cell.errors.validate();
          } catch (const Error& e) {
            g->fail(e.what(), g->node());
          }
          cells.push_back(std::move(cell));
        }
      }
    }
  } else {
    root.raw("cells");
    for (const auto& [s, w] : {std::pair{"mantissa", 1e-3}, {"mantissa", 1e-2}, {"exponent", 1e-2}}) {
      cells.push_back({cell_name(s, w, 23), s, w, 23, kAllBuffers, segment_config(s, w, 23)});
    }
  }
  std::set<std::string> names;
  for (const auto& c : cells) {
    if (c.name == "baseline" || !names.insert(c.name).second) {
      root.fail(fmt::format("cell name '{}' is reserved or repeated", c.name), root.node());
    }
  }
  return cells;
}

std::string curve_csv(const errortrain::TrainResult& r) {
  std::string s = csv_preamble() + "epoch,train_loss,test_accuracy,nan_sanitized_count,bit_flips\n";
  for (const auto& e : r.epochs) {
    s += fmt::format("{},{},{},{},{}\n", e.epoch, num(e.train_loss), num(e.test_accuracy), e.nan_sanitized, e.bit_flips);
  }
  return s;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

CommandOutput cmd_error_train(config::Section& root, Context& ctx) {
  CommandOutput res;
  json& cfg = res.resolved;

  errortrain::Dataset data;
  {
    auto d = root.child("dataset");
    if (!d) root.fail("missing required key 'dataset'", root.node());
    if (d->has("csv")) {
      const auto path = d->require<std::string>("csv");
      std::istringstream in(read_input(ctx, "dataset", path));
      const auto resolved = resolve_path(ctx, path);
      data = errortrain::parse_dataset_csv(in, resolved);
      cfg["dataset"] = {{"csv", std::filesystem::absolute(resolved).lexically_normal().string()}};
      d->raw("two_moons");
    } else if (auto m = d->child("two_moons")) {
      const auto train_n = m->get<std::size_t>("train", 400);
      const auto test_n = m->get<std::size_t>("test", 200);
      const auto noise = m->get("noise", 0.15);
      const auto seed = m->get<std::uint64_t>("seed", 7);
      m->finish();
      data = errortrain::make_two_moons(train_n, test_n, noise, seed);
      cfg["dataset"] = {{"two_moons", {{"train", train_n}, {"test", test_n}, {"noise", noise}, {"seed", seed}}}};
      d->raw("csv");
    } else {
      d->fail("dataset needs 'csv' or 'two_moons'", d->node());
    }
    d->finish();
  }

  errortrain::TinyNetSpec net;
  {
    auto n = root.child("network");
    config::Section s = n ? *n : config::Section(YAML::Node(), root.source(), "network");
    net.layer_sizes = s.get_list<std::size_t>("layer_sizes", {data.features, 96, 48, data.classes});
    net.activation = errortrain::activation_from_string(s.get<std::string>("activation", "tanh"));
    net.learning_rate = s.get("learning_rate", net.learning_rate);
    net.batch_size = s.get("batch_size", net.batch_size);
    net.epochs = s.get("epochs", net.epochs);
    s.finish();
    try {
      net.validate();
    } catch (const Error& e) {
      s.fail(e.what(), s.node());
    }
    if (net.layer_sizes.front() != data.features || net.layer_sizes.back() != data.classes) {
      s.fail_key("layer_sizes", fmt::format("must start with {} inputs and end with {} classes", data.features,
                                            data.classes));
    }
    cfg["network"] = {{"layer_sizes", net.layer_sizes},
                      {"activation", errortrain::activation_name(net.activation)},
                      {"learning_rate", net.learning_rate},
                      {"batch_size", net.batch_size},
                      {"epochs", net.epochs}};
  }

  const auto seeds = root.get_list<std::uint64_t>(
      "seeds", root.has("seed") ? std::vector<std::uint64_t>{root.require<std::uint64_t>("seed")}
                                : std::vector<std::uint64_t>{1, 2, 3});
  if (seeds.empty()) root.fail_key("seeds", "must not be empty");
  cfg["seeds"] = seeds;
  const double threshold = root.get("degraded_threshold", 0.10);
  if (!(threshold > 0 && threshold <= 1)) root.fail_key("degraded_threshold", "must lie in (0, 1]");
  cfg["degraded_threshold"] = threshold;
  const auto cells = parse_cells(root);
  root.raw("grid");
  {
    json cj = json::array();
    for (const auto& c : cells) {
      cj.push_back({{"name", c.name},
                    {"buffers", c.buffers},
                    {"bits", c.bits},
                    {"sign_wer", c.errors.sign_wer},
                    {"exponent_wer", c.errors.exponent_wer},
                    {"mantissa_wer", c.errors.mantissa_wer}});
      if (c.segment != "mixed") {
        cj.back().erase("sign_wer");
        cj.back().erase("exponent_wer");
        cj.back().erase("mantissa_wer");
        cj.back()["segment"] = c.segment;
        cj.back()["wer"] = c.wer;
      }
    }
    cfg["cells"] = cj;
  }
  root.finish();

  // Job k < seeds.size() is the clean baseline for seed k.
  const std::size_t runs = seeds.size() * (cells.size() + 1);
  std::vector<errortrain::TrainResult> results(runs);
  parallel_for(runs, ctx.workers, [&](std::size_t i) {
    auto spec = net;
    spec.seed = seeds[i % seeds.size()];
    const std::size_t cell = i / seeds.size();
    results[i] = cell == 0 ? errortrain::train_reference(spec, data)
                           : errortrain::train_with_errors(spec, data, cells[cell - 1].binding());
  });

  std::vector<double> base_acc;
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    base_acc.push_back(results[k].final_accuracy());
    res.files.push_back({fmt::format("curves/baseline_seed{}.csv", seeds[k]), curve_csv(results[k])});
  }
  const double base_mean = mean(base_acc);

  std::string csv = csv_preamble() +
                    "cell,segment,wer,bits,seed,epoch,train_loss,test_accuracy,nan_sanitized_count,diverged\n";
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    for (const auto& e : results[k].epochs) {
      csv += fmt::format("baseline,none,0,0,{},{},{},{},{},{}\n", seeds[k], e.epoch, num(e.train_loss),
                         num(e.test_accuracy), e.nan_sanitized, results[k].diverged ? 1 : 0);
    }
  }
  json cells_json = json::array();
  std::size_t degraded_cells = 0;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& cell = cells[c];
    std::vector<double> acc;
    json per_seed = json::array();
    bool any_diverged = false;
    for (std::size_t k = 0; k < seeds.size(); ++k) {
      const auto& r = results[(c + 1) * seeds.size() + k];
      for (const auto& e : r.epochs) {
        csv += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", cell.name, cell.segment, num(cell.wer), cell.bits,
                           seeds[k], e.epoch, num(e.train_loss), num(e.test_accuracy), e.nan_sanitized,
                           r.diverged ? 1 : 0);
      }
      res.files.push_back({fmt::format("curves/{}_seed{}.csv", cell.name, seeds[k]), curve_csv(r)});
      acc.push_back(r.final_accuracy());
      any_diverged = any_diverged || r.diverged;
      per_seed.push_back({{"seed", seeds[k]}, {"final_accuracy", r.final_accuracy()}, {"diverged", r.diverged}});
    }
    const double m = mean(acc);
    const bool degraded = base_mean - m > threshold;
    if (degraded || any_diverged) ++degraded_cells;
    cells_json.push_back({{"name", cell.name},
                          {"segment", cell.segment},
                          {"wer", cell.wer},
                          {"bits", cell.bits},
                          {"buffers", cell.buffers},
                          {"mean_final_accuracy", m},
                          {"accuracy_drop", base_mean - m},
                          {"degraded", degraded},
                          {"diverged", any_diverged},
                          {"runs", per_seed}});
  }
  res.files.insert(res.files.begin(), {"error_train.csv", csv});
  json base_runs = json::array();
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    base_runs.push_back({{"seed", seeds[k]}, {"final_accuracy", base_acc[k]}});
  }
  json doc = {{"manifest", kManifestName},
              {"parameters", net.parameter_count()},
              {"baseline", {{"mean_final_accuracy", base_mean}, {"runs", base_runs}}},
              {"cells", cells_json}};
  res.files.insert(res.files.begin() + 1, {"error_train_summary.json", doc.dump(2) + "\n"});
  res.summary = fmt::format("{} cells x {} seeds, {} degraded or diverged", cells.size(), seeds.size(),
                            degraded_cells);
  return res;
}

}  // namespace sttsim::cli
