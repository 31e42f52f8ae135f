// Copyright 2026 The CityPulse Authors.
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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <limits>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "citypulse/aggregate.hpp"
#include "citypulse/classify.hpp"
#include "citypulse/cli.hpp"
#include "citypulse/error.hpp"
#include "citypulse/features.hpp"
#include "citypulse/geo.hpp"
#include "citypulse/ingest.hpp"
#include "citypulse/synth.hpp"
#include "citypulse/textprep.hpp"
#include "citypulse/topics.hpp"

namespace py = pybind11;
using namespace citypulse;

namespace {

VocabularyParams vocab_params(std::uint64_t min_count, double max_df, std::size_t max_size) {
  VocabularyParams p;
  p.min_count = min_count;
  p.max_df_ratio = max_df;
  p.max_size = max_size == 0 ? std::numeric_limits<std::size_t>::max() : max_size;
  return p;
}

std::vector<BowVector> bows_of(const std::vector<TokenDoc>& docs, const Vocabulary& vocab) {
  std::vector<BowVector> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(bow_vector(d, vocab));
  return out;
}

py::dict summary_dict(const FiveNumberSummary& s) {
  py::dict d;
  d["min"] = s.min;
  d["q1"] = s.q1;
  d["median"] = s.median;
  d["q3"] = s.q3;
  d["max"] = s.max;
  d["iqr"] = s.iqr;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "CityPulse core operations";

  static PyObject* error_type = PyErr_NewException("citypulse._core.Error", PyExc_RuntimeError, nullptr);
  m.attr("Error") = py::handle(error_type);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(std::string(e.kind_name()) + ": " + e.what());
      exc.attr("kind") = std::string(e.kind_name());
      PyErr_SetObject(error_type, exc.ptr());
    }
  });

  // ---- text ----
  m.def(
      "tokenize",
      [](const std::string& text) {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& t : tokenize(text)) out.emplace_back(t.surface, std::string(token_kind_name(t.kind)));
        return out;
      },
      py::arg("text"), "Tokens as (surface, kind) pairs.");
  m.def(
      "preprocess",
      [](const std::string& text, const std::string& preset, const std::string& lang) {
        return run_pipeline(text, PipelineConfig::preset(preset, lang)).tokens;
      },
      py::arg("text"), py::arg("preset") = "topic", py::arg("lang") = "pt");

  // ---- records and geography ----
  m.def(
      "normalize_record", [](const std::string& line) { return to_wire_json(parse_record(line)); }, py::arg("line"),
      "Parses one NDJSON record and returns its canonical wire form.");
  m.def(
      "city_filter",
      [](const std::string& line, std::pair<double, double> sw, std::pair<double, double> ne, const std::string& mode) {
        const GeoBox box(GeoPoint(sw.first, sw.second), GeoPoint(ne.first, ne.second));
        const FilterDecision d = city_filter(parse_record(line), box, parse_place_mode(mode));
        return std::make_pair(d.accepted, std::string(filter_reason_name(d.reason)));
      },
      py::arg("line"), py::arg("sw"), py::arg("ne"), py::arg("mode") = "containment",
      "(accepted, reason) for one record against a (lat, lon) box.");

  // ---- vocabulary and embeddings ----
  py::class_<Vocabulary>(m, "Vocabulary")
      .def("__len__", &Vocabulary::size)
      .def_property_readonly("terms", &Vocabulary::terms)
      .def("find", &Vocabulary::find, py::arg("term"))
      .def("count", &Vocabulary::count, py::arg("index"))
      .def("bow", [](const Vocabulary& v, const TokenDoc& doc) { return bow_vector(doc, v).entries; })
      .def("to_json", [](const Vocabulary& v) { return v.to_json().dump(); })
      .def_static("from_json", [](const std::string& s) { return Vocabulary::from_json(nlohmann::json::parse(s)); });
  m.def(
      "build_vocabulary",
      [](const std::vector<TokenDoc>& docs, std::uint64_t min_count, double max_df, std::size_t max_size) {
        return build_vocabulary(docs, vocab_params(min_count, max_df, max_size));
      },
      py::arg("docs"), py::arg("min_count") = 1, py::arg("max_df") = 1.0, py::arg("max_size") = 0,
      "max_size 0 keeps every term that passes the thresholds.");

  py::class_<EmbeddingModel>(m, "EmbeddingModel")
      .def_property_readonly("dim", &EmbeddingModel::dim)
      .def_property_readonly("vocabulary", &EmbeddingModel::vocabulary)
      .def(
          "vector",
          [](const EmbeddingModel& e, const std::string& term) -> std::optional<std::vector<float>> {
            const auto v = e.vector(term);
            if (v.empty()) return std::nullopt;
            return std::vector<float>(v.begin(), v.end());
          },
          py::arg("term"))
      .def(
          "similarity",
          [](const EmbeddingModel& e, const std::string& a, const std::string& b) -> std::optional<double> {
            const auto x = e.vector(a), y = e.vector(b);
            if (x.empty() || y.empty()) return std::nullopt;
            return cosine(x, y);
          },
          py::arg("a"), py::arg("b"))
      .def(
          "mean_vector", [](const EmbeddingModel& e, const TokenDoc& doc) { return mean_word_vector(e, doc); },
          py::arg("doc"));
  m.def(
      "train_skipgram",
      [](const std::vector<TokenDoc>& docs, std::size_t dim, std::size_t window, std::size_t epochs,
         std::size_t negatives, std::uint64_t min_count, std::uint64_t seed) {
        SkipgramConfig c;
        c.dim = dim;
        c.window = window;
        c.epochs = epochs;
        c.negatives = negatives;
        c.seed = seed;
        const Vocabulary vocab = build_vocabulary(docs, vocab_params(min_count, 1.0, 0));
        py::gil_scoped_release release;
        return train_skipgram(docs, vocab, c);
      },
      py::arg("docs"), py::arg("dim") = 100, py::arg("window") = 2, py::arg("epochs") = 10, py::arg("negatives") = 5,
      py::arg("min_count") = 1, py::arg("seed") = 1);

  // ---- topics ----
  py::class_<LdaModel>(m, "LdaModel")
      .def_property_readonly("topics", &LdaModel::topics)
      .def_property_readonly("docs", &LdaModel::docs)
      .def_property_readonly("vocabulary", &LdaModel::vocabulary)
      .def("theta", &LdaModel::theta, py::arg("doc"))
      .def(
          "top_words", [](const LdaModel& lda, std::size_t k, std::size_t n) { return top_words(lda, k, n).terms; },
          py::arg("topic"), py::arg("n") = 10)
      .def(
          "infer",
          [](const LdaModel& lda, const TokenDoc& doc, std::size_t iterations, std::uint64_t seed) {
            return infer_topics(lda, bow_vector(doc, lda.vocabulary()), iterations, seed);
          },
          py::arg("doc"), py::arg("iterations") = 20, py::arg("seed") = 0);
  m.def(
      "train_lda",
      [](const std::vector<TokenDoc>& docs, std::size_t topics, std::size_t iterations, std::uint64_t seed,
         std::optional<double> alpha, double beta, std::uint64_t min_count, double max_df) {
        LdaConfig c;
        c.topics = topics;
        c.iterations = iterations;
        c.seed = seed;
        c.alpha = alpha;
        c.beta = beta;
        const Vocabulary vocab = build_vocabulary(docs, vocab_params(min_count, max_df, 0));
        const auto bows = bows_of(docs, vocab);
        py::gil_scoped_release release;
        return train_lda(bows, vocab, c);
      },
      py::arg("docs"), py::arg("topics"), py::arg("iterations") = 20, py::arg("seed") = 1,
      py::arg("alpha") = py::none(), py::arg("beta") = 0.01, py::arg("min_count") = 1, py::arg("max_df") = 1.0,
      "alpha None means 50 / topics.");

  // ---- evaluation ----
  m.def(
      "roc_auc",
      [](const std::vector<double>& scores, const std::vector<int>& labels) {
        const RocResult r = roc_auc(scores, labels);
        std::vector<std::pair<double, double>> pts;
        for (const auto& p : r.points) pts.emplace_back(p.fpr, p.tpr);
        py::dict d;
        d["auc"] = r.auc;
        d["points"] = pts;
        d["degenerate"] = r.degenerate;
        return d;
      },
      py::arg("scores"), py::arg("labels"), "labels are 1 or -1.");
  m.def(
      "metrics",
      [](std::uint64_t tp, std::uint64_t fp, std::uint64_t fn, std::uint64_t tn) {
        const Metrics x = metrics(ConfusionCounts{tp, fp, fn, tn});
        py::dict d;
        d["precision"] = x.precision;
        d["recall"] = x.recall;
        d["f1"] = x.f1;
        d["degenerate"] = x.degenerate;
        return d;
      },
      py::arg("tp"), py::arg("fp"), py::arg("fn"), py::arg("tn"));

  // ---- aggregation ----
  m.def(
      "five_number_summary", [](std::vector<double> v) { return summary_dict(five_number_summary(std::move(v))); },
      py::arg("values"));

  // ---- synthetic data ----
  m.def(
      "generate_fixture",
      [](std::uint64_t seed, double shrink, double holdout, std::size_t embedding_docs) {
        FixtureSpec spec;
        spec.counts = spec.counts.scaled(shrink);
        spec.classification.holdout_fraction = holdout;
        spec.embedding_docs = embedding_docs;
        const SynthCorpus c = generate_fixture(spec, seed);
        std::ostringstream out;
        write_ndjson(out, c.records);
        return std::make_pair(out.str(), c.ledger.to_json().dump());
      },
      py::arg("seed") = 1, py::arg("shrink") = 1.0, py::arg("holdout") = 0.0, py::arg("embedding_docs") = 6000,
      "(ndjson, ledger_json) of the ledgered fixture corpus.");

  // ---- command line ----
  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "(exit code, stdout, stderr) of one citypulse command.");
}
