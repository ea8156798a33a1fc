// JSON crosses the boundary as text; the Python package decodes it.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "saltdialog/convgen.hpp"
#include "saltdialog/dst.hpp"
#include "saltdialog/errors.hpp"
#include "saltdialog/evalx.hpp"
#include "saltdialog/food_kb.hpp"
#include "saltdialog/nscorrect.hpp"
#include "saltdialog/service.hpp"

namespace py = pybind11;
using namespace saltdialog;
using nlohmann::json;

namespace {

UnitTable units_from(const std::optional<std::filesystem::path>& path) {
    return path ? UnitTable::load(*path) : UnitTable::defaults();
}

SlotMap constraints_from(const std::map<std::string, std::string>& slots) {
    SlotMap out;
    for (const auto& [name, value] : slots) {
        const auto r = relation_from_string(name);
        if (!r)
            throw py::value_error("unknown relation '" + name + "'");
        out[*r] = value;
    }
    return out;
}

json outcome_to_json(const CorrectionOutcome& o) {
    json j{{"belief", belief_to_json(o.belief)},
           {"status", std::string(to_string(o.status))},
           {"candidates", o.candidates},
           {"metric", o.metric},
           {"reason", o.reason}};
    j["record_id"] = o.record_id ? json(*o.record_id) : json(nullptr);
    j["weight"] = o.weight ? json(*o.weight) : json(nullptr);
    return j;
}

// Owns everything a DialogManager borrows.
class Service {
public:
    Service(KnowledgeBase kb, PolicyConfig config)
        : kb_(std::move(kb)), dm_(kb_, UnitTable::defaults(), TemplatePack::builtin(), config) {}

    std::string create_session() { return dm_.create_session(); }
    std::string message(const std::string& id, const std::string& text) {
        return dm_.handle_message(id, text).to_json().dump();
    }
    std::string state(const std::string& id) { return dm_.get_state(id).to_json().dump(); }

private:
    KnowledgeBase kb_;
    DialogManager dm_;
};

} // namespace

PYBIND11_MODULE(_core, m) {
    py::register_exception<Error>(m, "SaltDialogError", PyExc_RuntimeError);

    py::class_<KnowledgeBase>(m, "KnowledgeBase")
        .def_static(
            "ingest",
            [](const std::filesystem::path& records, const std::filesystem::path& ontology,
               const std::optional<std::filesystem::path>& units) {
                return ingest_records(records, Ontology::load(ontology), units_from(units));
            },
            py::arg("records"), py::arg("ontology"), py::arg("units") = py::none())
        .def_static("load", &KnowledgeBase::load, py::arg("path"))
        .def_static("from_json", [](const std::string& text) { return KnowledgeBase::from_json(json::parse(text)); })
        .def("save", &KnowledgeBase::save, py::arg("path"))
        .def("to_json", [](const KnowledgeBase& kb) { return kb.to_json().dump(); })
        .def("__len__", &KnowledgeBase::size)
        .def(
            "lookup",
            [](const KnowledgeBase& kb, const std::map<std::string, std::string>& slots) {
                std::vector<int> ids;
                for (const auto* r : kb.lookup(constraints_from(slots)))
                    ids.push_back(r->id);
                return ids;
            },
            py::arg("slots"))
        .def(
            "salt_for",
            [](const KnowledgeBase& kb, int id, double weight, const std::string& metric) {
                const auto* r = kb.find(id);
                if (!r)
                    throw py::key_error("no record " + std::to_string(id));
                return salt_for(*r, weight, metric, UnitTable::defaults());
            },
            py::arg("record_id"), py::arg("weight"), py::arg("metric"));

    m.def("parse_description", &parse_description, py::arg("raw"));

    m.def(
        "generate",
        [](const KnowledgeBase& kb, std::size_t n, std::uint64_t seed, double random_rate, double changing_rate,
           int max_questions) {
            GenConfig g;
            g.n_dialogues = n;
            g.seed = seed;
            g.random_turn_rate = random_rate;
            g.changing_turn_rate = changing_rate;
            g.max_questions = max_questions;
            auto out = generate_corpus(kb, g);
            return std::make_pair(corpus_to_json(out.corpus).dump(), out.stats.to_json().dump());
        },
        py::arg("kb"), py::arg("n"), py::arg("seed") = 0, py::arg("random_rate") = GenConfig{}.random_turn_rate,
        py::arg("changing_rate") = GenConfig{}.changing_turn_rate, py::arg("max_questions") = 4);

    m.def(
        "correct",
        [](const std::string& belief, const KnowledgeBase& kb) {
            return outcome_to_json(correct(belief_from_json(json::parse(belief)), kb, UnitTable::defaults())).dump();
        },
        py::arg("belief"), py::arg("kb"));

    m.def(
        "evaluate",
        [](const std::string& corpus, const KnowledgeBase& kb, const std::string& predictor, double salt_corrupt_prob,
           double slot_corrupt_prob, std::uint64_t seed, const std::string& endpoint) {
            EvalOptions o;
            const auto kind = predictor_kind_from_string(predictor);
            if (!kind)
                throw py::value_error("unknown predictor '" + predictor + "'");
            o.predictor = *kind;
            o.corruption = {salt_corrupt_prob, slot_corrupt_prob, seed};
            o.corruption.validate();
            o.remote.endpoint = endpoint;
            py::gil_scoped_release release;
            return evaluate_corpus(corpus_from_json(json::parse(corpus)), kb, o).to_json().dump();
        },
        py::arg("corpus"), py::arg("kb"), py::arg("predictor") = "reference", py::arg("salt_corrupt_prob") = 1.0,
        py::arg("slot_corrupt_prob") = 0.1, py::arg("seed") = 0, py::arg("endpoint") = "");

    m.def("serialize_belief", [](const std::string& b) { return serialize_belief(belief_from_json(json::parse(b))); });
    m.def("parse_belief", [](const std::string& text) { return belief_to_json(parse_belief(text)).dump(); });
    m.def("corpus_bleu", [](const std::vector<std::string>& c, const std::vector<std::string>& r) {
        return corpus_bleu(c, r);
    });
    m.def("readability", [](const std::string& text) { return readability(text).to_json().dump(); });

    py::class_<Service>(m, "Service")
        .def(py::init([](const KnowledgeBase& kb, int max_questions, int max_turns) {
                 PolicyConfig c;
                 c.max_questions = max_questions;
                 c.max_turns = max_turns;
                 c.validate();
                 return std::make_unique<Service>(kb, c);
             }),
             py::arg("kb"), py::arg("max_questions") = 4, py::arg("max_turns") = 12)
        .def("create_session", &Service::create_session)
        .def("message", &Service::message, py::arg("session_id"), py::arg("text"))
        .def("state", &Service::state, py::arg("session_id"));
}
