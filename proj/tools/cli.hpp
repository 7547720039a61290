#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ra_ner/ra_ner.hpp"

namespace ra_ner::cli {

inline constexpr std::string_view tool_version = "ra-ner 1.0.0";

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

inline LogLevel log_level()
{
    char const* env = std::getenv("RA_NER_LOG");
    std::string v = env ? text::ascii_lower(env) : "warn";
    if (v == "error") return LogLevel::error;
    if (v == "info") return LogLevel::info;
    if (v == "debug") return LogLevel::debug;
    return LogLevel::warn;
}

class Logger {
  public:
    explicit Logger(std::ostream& err) : m_err(err), m_level(log_level()) {}

    void log(LogLevel l, std::string const& msg) const
    {
        static constexpr char const* names[] = {"error", "warn", "info", "debug"};
        if (static_cast<int>(l) <= static_cast<int>(m_level)) {
            m_err << "[" << names[static_cast<int>(l)] << "] " << msg << '\n';
        }
    }
    void info(std::string const& msg) const { log(LogLevel::info, msg); }
    void debug(std::string const& msg) const { log(LogLevel::debug, msg); }

  private:
    std::ostream& m_err;
    LogLevel m_level;
};

inline std::vector<Example> read_conll(std::string const& path) { return corpus::parse_conll(binary::read_file(path)); }

inline std::vector<nlohmann::json> read_jsonl(std::string const& path)
{
    std::ifstream in(path);
    if (!in) {
        throw error("cannot open " + path);
    }
    std::vector<nlohmann::json> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (text::trim(line).empty()) {
            continue;
        }
        try {
            out.push_back(nlohmann::json::parse(line));
        } catch (nlohmann::json::exception const& e) {
            throw parse_error(path + ": " + e.what(), n);
        }
    }
    return out;
}

inline void write_jsonl(std::string const& path, std::vector<nlohmann::json> const& records)
{
    std::string out;
    for (auto const& r : records) {
        out += r.dump() + "\n";
    }
    binary::write_file(path, out);
}

/// 64-bit FNV-1a, hex.
inline std::string content_hash(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string read_text_or(std::string const& path, std::string fallback)
{
    return path.empty() ? fallback : text::trim(binary::read_file(path));
}

inline std::string const default_system_prompt =
    "You are a careful annotator of named entities in Hindi text.";
inline std::string const default_instruction =
    "List every named entity in the sentence as 'entity: TYPE' pairs separated by commas, where TYPE is one of "
    "LOC, PER, PROD, GRP, CORP, CW. Think about each candidate before answering.";

inline std::map<std::string, retrieval::RetrievedContext> read_contexts(std::string const& path)
{
    std::map<std::string, retrieval::RetrievedContext> out;
    for (auto const& j : read_jsonl(path)) {
        auto [id, ctx] = retrieval::from_json(j);
        out[id] = std::move(ctx);
    }
    return out;
}

struct Globals {
    std::uint64_t seed = 0;
    std::size_t workers = 1;
};

struct RetrievalOpts {
    std::size_t k_sentence = 10;
    std::size_t k_title = 1;
    std::size_t max_entries = 20;

    void add(CLI::App* app)
    {
        app->add_option("--k-sentence", k_sentence, "Top documents from sentence retrieval")->capture_default_str();
        app->add_option("--k-title", k_title, "Top titles per entity")->capture_default_str();
        app->add_option("--max-entries", max_entries, "Cap on context entries per example")->capture_default_str();
    }

    retrieval::RetrievalConfig config() const
    {
        retrieval::RetrievalConfig c{k_sentence, k_title, max_entries};
        c.validate();
        return c;
    }
};

struct AugmentOpts {
    std::string eos = "<EOS>";
    std::string sep = "</s>";
    std::size_t budget = 512;

    void add(CLI::App* app)
    {
        app->add_option("--eos", eos, "Marker between sentence and context")->capture_default_str();
        app->add_option("--sep", sep, "Separator token between context entries")->capture_default_str();
        app->add_option("--budget", budget, "Maximum words after augmentation")->capture_default_str();
    }

    augment::AugmentConfig config() const { return {eos, sep, budget}; }
};

/// `linear:<model>`, `gazetteer:<table>`, or `remote:<endpoint>`.
inline std::unique_ptr<tagger::Tagger> make_tagger(std::string const& spec, std::size_t workers, bool context_match,
                                                   std::size_t in_flight, int timeout_ms)
{
    auto colon = spec.find(':');
    if (colon == std::string::npos) {
        throw error("tagger spec must be linear:<model>, gazetteer:<table> or remote:<endpoint>");
    }
    auto kind = spec.substr(0, colon);
    auto arg = spec.substr(colon + 1);
    if (kind == "linear") {
        return std::make_unique<tagger::LinearTagger>(tagger::deserialize_linear(binary::read_file(arg)), workers);
    }
    if (kind == "gazetteer") {
        std::ifstream in(arg);
        if (!in) {
            throw error("cannot open " + arg);
        }
        return std::make_unique<tagger::GazetteerTagger>(tagger::load_gazetteer(in), context_match, workers);
    }
    if (kind == "remote") {
        return std::make_unique<tagger::RemoteTagger>(arg, tagger::RemoteOptions{timeout_ms, in_flight});
    }
    throw error("unknown tagger kind '" + kind + "'");
}

inline std::vector<nlohmann::json> entity_records(std::vector<Example> const& dataset, iterate::EntitySets const& sets)
{
    std::vector<nlohmann::json> out;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        out.push_back(iterate::entities_to_json(dataset[i].id, sets[i]));
    }
    return out;
}

int dispatch(std::vector<std::string> const& args, std::ostream& out, std::ostream& err);

namespace detail {

inline int run_manifest(std::string const& manifest_path, std::string record_path, Globals const& g,
                        std::ostream& out, std::ostream& err)
{
    auto manifest = nlohmann::json::parse(binary::read_file(manifest_path));
    if (!manifest.contains("steps") || !manifest["steps"].is_array()) {
        throw error("manifest needs a 'steps' array");
    }
    auto seed = manifest.value("seed", g.seed);
    nlohmann::json record = {{"tool_version", tool_version}, {"seed", seed}, {"steps", nlohmann::json::array()}};
    for (auto const& step : manifest["steps"]) {
        auto name = step.value("name", std::string("unnamed"));
        std::vector<std::string> args;
        for (auto const& a : step.at("args")) {
            args.push_back(a.get<std::string>());
        }
        nlohmann::json inputs = nlohmann::json::object();
        for (auto const& p : step.value("inputs", nlohmann::json::array())) {
            auto path = p.get<std::string>();
            if (!std::filesystem::exists(path)) {
                throw error("step '" + name + "': missing input " + path);
            }
            inputs[path] = content_hash(binary::read_file(path));
        }
        std::vector<std::string> full = {"--seed", std::to_string(seed)};
        full.insert(full.end(), args.begin(), args.end());
        std::string joined;
        for (auto const& a : full) {
            joined += a + '\0';
        }
        int rc = dispatch(full, out, err);
        if (rc != 0) {
            err << "step '" << name << "' failed with exit code " << rc << '\n';
            return rc;
        }
        nlohmann::json outputs = nlohmann::json::object();
        for (auto const& p : step.value("outputs", nlohmann::json::array())) {
            auto path = p.get<std::string>();
            if (std::filesystem::is_regular_file(path)) {
                outputs[path] = content_hash(binary::read_file(path));
            } else if (std::filesystem::is_directory(path)) {
                std::vector<std::string> files;
                for (auto const& e : std::filesystem::recursive_directory_iterator(path)) {
                    if (e.is_regular_file()) {
                        files.push_back(e.path().string());
                    }
                }
                std::sort(files.begin(), files.end());
                for (auto const& f : files) {
                    outputs[f] = content_hash(binary::read_file(f));
                }
            } else {
                throw error("step '" + name + "': declared output " + path + " was not produced");
            }
        }
        record["steps"].push_back({{"name", name},
                                   {"args", full},
                                   {"config_hash", content_hash(joined)},
                                   {"inputs", inputs},
                                   {"outputs", outputs}});
    }
    if (record_path.empty()) {
        record_path = manifest_path + ".record.json";
    }
    binary::write_file(record_path, record.dump(2) + "\n");
    return 0;
}

}  // namespace detail

/// Runs one command line. Exit codes: 0 ok, 1 runtime failure, 2 usage.
inline int dispatch(std::vector<std::string> const& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Retrieval-augmented NER toolkit", "ra-ner"};
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML/INI file with option defaults (flags take precedence)");
    Globals g;
    app.add_option("--seed", g.seed, "Seed for hashing, shuffling and fuzzing")->capture_default_str();
    app.add_option("--workers", g.workers, "Per-example parallelism (output order is input order)")
        ->capture_default_str();
    app.set_version_flag("--version", std::string(tool_version));

    std::function<void()> action;
    Logger log(err);

    // stats
    auto* stats = app.add_subcommand("stats", "Per-label counts and sentence length histogram");
    std::string stats_conll, stats_kv;
    stats->add_option("--conll", stats_conll, "CoNLL file")->required()->check(CLI::ExistingFile);
    stats->add_option("--kv", stats_kv, "Also write key<TAB>value lines here");
    stats->callback([&] {
        action = [&] {
            auto st = corpus::dataset_stats(read_conll(stats_conll));
            out << corpus::format_stats_table(st);
            if (!stats_kv.empty()) {
                binary::write_file(stats_kv, corpus::format_stats_kv(st));
            }
        };
    });

    // index
    auto* index = app.add_subcommand("index", "Build or query the knowledge-base index");
    index->require_subcommand(1);
    auto* build = index->add_subcommand("build", "Index a KB-JSONL file");
    std::string kb_path, idx_out;
    kb::Bm25Params bm25;
    build->add_option("--kb", kb_path, "KB-JSONL input")->required()->check(CLI::ExistingFile);
    build->add_option("--out", idx_out, "Index file to write")->required();
    build->add_option("--k1", bm25.k1, "BM25 k1")->capture_default_str();
    build->add_option("--b", bm25.b, "BM25 b")->capture_default_str();
    build->callback([&] {
        action = [&] {
            std::ifstream in(kb_path);
            auto store = kb::ingest(in);
            log.info("ingested " + std::to_string(store.size()) + " documents");
            auto idx = kb::build_index(store, bm25, g.workers);
            kb::save_index(idx_out, idx, store);
            out << "indexed " << store.size() << " documents, " << idx.field(kb::Field::sentence).units.size()
                << " sentences, " << idx.field(kb::Field::sentence).terms.size() << " sentence terms\n";
        };
    });
    auto* search = index->add_subcommand("search", "Query one field of an index");
    std::string search_idx, search_field = "sentence", search_query;
    std::size_t search_k = 10;
    search->add_option("--idx", search_idx, "Index file")->required()->check(CLI::ExistingFile);
    search->add_option("--field", search_field, "sentence or title")->capture_default_str();
    search->add_option("--k", search_k, "Number of hits")->capture_default_str()->check(CLI::PositiveNumber);
    search->add_option("--query", search_query, "Query text")->required();
    search->callback([&] {
        action = [&] {
            auto loaded = kb::load_index(search_idx);
            auto field = kb::parse_field(search_field);
            auto hits = loaded.index.search(field, search_query, search_k);
            std::size_t rank = 0;
            for (auto const& h : hits) {
                auto const& doc = loaded.store.at(h.doc_id);
                auto const& textual = field == kb::Field::title ? doc.title
                                                                : loaded.store.sentence(h.doc_id, h.field_unit_id);
                char score[32];
                std::snprintf(score, sizeof score, "%.6f", h.score);
                out << ++rank << '\t' << h.doc_id << '\t' << h.field_unit_id << '\t' << score << '\t' << doc.title
                    << '\t' << textual << '\n';
            }
        };
    });

    // retrieve
    auto* retrieve = app.add_subcommand("retrieve", "Retrieve rendered contexts for each example");
    std::string ret_idx, ret_conll, ret_entities, ret_out;
    bool ret_gold = false;
    RetrievalOpts ret_opts;
    retrieve->add_option("--idx", ret_idx, "Index file")->required()->check(CLI::ExistingFile);
    retrieve->add_option("--conll", ret_conll, "Examples")->required()->check(CLI::ExistingFile);
    retrieve->add_option("--entities", ret_entities, "Entity JSONL for title retrieval")->check(CLI::ExistingFile);
    retrieve->add_flag("--gold-entities", ret_gold, "Use the gold spans of --conll for title retrieval");
    retrieve->add_option("--out", ret_out, "Context JSONL")->required();
    ret_opts.add(retrieve);
    retrieve->callback([&] {
        action = [&] {
            auto loaded = kb::load_index(ret_idx);
            auto data = read_conll(ret_conll);
            auto cfg = ret_opts.config();
            iterate::EntitySets seeds;
            bool use_entities = ret_gold || !ret_entities.empty();
            if (ret_gold) {
                for (auto const& ex : data) {
                    seeds.push_back(corpus::extract_spans(ex.tokens, corpus::repair_bio(ex.labels)));
                }
            } else if (!ret_entities.empty()) {
                std::ifstream in(ret_entities);
                seeds = iterate::seed_with_external_entities(data, in);
            }
            std::vector<nlohmann::json> records(data.size());
            parallel_for(data.size(), g.workers, [&](std::size_t i) {
                auto sent = retrieval::retrieve_by_sentence(data[i], loaded.index, loaded.store, cfg);
                retrieval::RetrievedContext ent;
                if (use_entities) {
                    ent = retrieval::retrieve_by_entities(seeds[i], loaded.index, loaded.store, cfg);
                }
                records[i] = retrieval::to_json(data[i].id, retrieval::combine(sent, ent, cfg));
            });
            write_jsonl(ret_out, records);
        };
    });

    // augment
    auto* aug = app.add_subcommand("augment", "Materialize augmented examples and fine-tune records");
    std::string aug_conll, aug_ctx, aug_out, aug_sidecar, ft_out, ft_system, ft_instruction;
    std::size_t ft_max_words = 800;
    AugmentOpts aug_opts;
    aug->add_option("--conll", aug_conll, "Examples")->required()->check(CLI::ExistingFile);
    aug->add_option("--ctx", aug_ctx, "Context JSONL from retrieve")->check(CLI::ExistingFile);
    aug->add_option("--out", aug_out, "Augmented CoNLL (full tokens and labels)")->required();
    aug->add_option("--sidecar", aug_sidecar, "Base length / marker position JSONL")->required();
    aug->add_option("--finetune-out", ft_out, "Also write generative fine-tune records");
    aug->add_option("--system-file", ft_system, "System prompt text")->check(CLI::ExistingFile);
    aug->add_option("--instruction-file", ft_instruction, "Instruction text")->check(CLI::ExistingFile);
    aug->add_option("--max-input-words", ft_max_words, "Word cap for fine-tune inputs")->capture_default_str();
    aug_opts.add(aug);
    aug->callback([&] {
        action = [&] {
            auto data = read_conll(aug_conll);
            std::map<std::string, retrieval::RetrievedContext> ctxs;
            if (!aug_ctx.empty()) {
                ctxs = read_contexts(aug_ctx);
            }
            auto cfg = aug_opts.config();
            std::vector<Example> full;
            std::vector<nlohmann::json> side, records;
            augment::FinetunePrompts prompts{read_text_or(ft_system, default_system_prompt),
                                             read_text_or(ft_instruction, default_instruction), ft_max_words};
            for (auto const& ex : data) {
                auto it = ctxs.find(ex.id);
                auto const& ctx = it == ctxs.end() ? retrieval::RetrievedContext{} : it->second;
                auto a = augment::augment_example(ex, ctx, cfg);
                full.push_back(augment::as_example(a));
                side.push_back(augment::sidecar_record(a));
                if (!ft_out.empty()) {
                    records.push_back(augment::build_finetune_record(ex, ctx, prompts).to_json());
                }
            }
            binary::write_file(aug_out, corpus::write_conll(full));
            write_jsonl(aug_sidecar, side);
            if (!ft_out.empty()) {
                write_jsonl(ft_out, records);
            }
        };
    });

    // train
    auto* train = app.add_subcommand("train", "Train the hashed-feature linear tagger");
    std::string train_aug, train_side, train_out, train_eos = "<EOS>";
    tagger::TrainConfig tcfg;
    train->add_option("--aug", train_aug, "Augmented CoNLL")->required()->check(CLI::ExistingFile);
    train->add_option("--sidecar", train_side, "Sidecar JSONL")->required()->check(CLI::ExistingFile);
    train->add_option("--out", train_out, "Model file")->required();
    train->add_option("--epochs", tcfg.epochs, "SGD epochs")->capture_default_str();
    train->add_option("--lr", tcfg.learning_rate, "Learning rate")->capture_default_str();
    train->add_option("--dim", tcfg.dim, "Hash dimension")->capture_default_str();
    train->add_option("--eos", train_eos, "End marker used at augmentation")->capture_default_str();
    train->callback([&] {
        action = [&] {
            tcfg.seed = g.seed;
            auto examples = augment::from_materialized(read_conll(train_aug), read_jsonl(train_side), train_eos);
            auto res = tagger::train_linear(examples, tcfg);
            for (std::size_t e = 0; e < res.epoch_loss.size(); ++e) {
                log.info("epoch " + std::to_string(e + 1) + " loss " + std::to_string(res.epoch_loss[e]));
            }
            binary::write_file(train_out, tagger::serialize(res.model));
        };
    });

    // tag
    auto* tag = app.add_subcommand("tag", "Label augmented examples and project to the original words");
    std::string tag_spec, tag_aug, tag_side, tag_out, tag_eos = "<EOS>";
    bool no_context_match = false;
    std::size_t in_flight = 16;
    int timeout_ms = 30000;
    tag->add_option("--tagger", tag_spec, "linear:<model> | gazetteer:<table> | remote:<endpoint>")->required();
    tag->add_option("--aug", tag_aug, "Augmented CoNLL")->required()->check(CLI::ExistingFile);
    tag->add_option("--sidecar", tag_side, "Sidecar JSONL")->required()->check(CLI::ExistingFile);
    tag->add_option("--out", tag_out, "Predicted CoNLL (original words)")->required();
    tag->add_option("--eos", tag_eos, "End marker used at augmentation")->capture_default_str();
    tag->add_flag("--no-context-match", no_context_match, "Gazetteer: ignore retrieved link markup");
    tag->add_option("--in-flight", in_flight, "Remote: concurrent requests")->capture_default_str();
    tag->add_option("--timeout-ms", timeout_ms, "Remote: response timeout")->capture_default_str();
    tag->callback([&] {
        action = [&] {
            auto examples = augment::from_materialized(read_conll(tag_aug), read_jsonl(tag_side), tag_eos);
            auto t = make_tagger(tag_spec, g.workers, !no_context_match, in_flight, timeout_ms);
            auto full = t->tag(examples);
            std::vector<Example> pred;
            for (std::size_t i = 0; i < examples.size(); ++i) {
                tagger::check_output(examples[i], full[i], t->name());
                pred.push_back({examples[i].base.id, examples[i].base.tokens,
                                corpus::repair_bio(augment::strip_augmentation(full[i], examples[i].base_length()))});
            }
            binary::write_file(tag_out, corpus::write_conll(pred));
        };
    });

    // iterate
    auto* iter = app.add_subcommand("iterate", "Iterative entity retrieval until predictions stop changing");
    std::string it_idx, it_kb, it_conll, it_spec, it_out, it_gold, it_seeds;
    iterate::SaturationConfig sat;
    RetrievalOpts it_ret;
    AugmentOpts it_aug;
    bool it_no_ctx = false;
    iter->add_option("--idx", it_idx, "Index file")->required()->check(CLI::ExistingFile);
    iter->add_option("--kb", it_kb, "KB-JSONL store (defaults to the store inside --idx)")->check(CLI::ExistingFile);
    iter->add_option("--conll", it_conll, "Examples to label")->required()->check(CLI::ExistingFile);
    iter->add_option("--tagger", it_spec, "linear:<model> | gazetteer:<table> | remote:<endpoint>")->required();
    iter->add_option("--max-iters", sat.max_iters, "Iteration cap")->capture_default_str()->check(CLI::PositiveNumber);
    iter->add_option("--epsilon", sat.epsilon, "Stop when change ratio falls below this")->capture_default_str();
    iter->add_option("--out", it_out, "Trace directory")->required();
    iter->add_option("--gold", it_gold, "Gold CoNLL for per-iteration scores")->check(CLI::ExistingFile);
    iter->add_option("--seed-entities", it_seeds, "Entity JSONL used for the first iteration")
        ->check(CLI::ExistingFile);
    iter->add_flag("--no-context-match", it_no_ctx, "Gazetteer: ignore retrieved link markup");
    iter->add_option("--in-flight", in_flight, "Remote: concurrent requests")->capture_default_str();
    iter->add_option("--timeout-ms", timeout_ms, "Remote: response timeout")->capture_default_str();
    it_ret.add(iter);
    it_aug.add(iter);
    iter->callback([&] {
        action = [&] {
            auto loaded = kb::load_index(it_idx);
            if (!it_kb.empty()) {
                std::ifstream in(it_kb);
                auto store = kb::ingest(in);
                if (store.size() != loaded.index.num_docs()) {
                    throw error("--kb has " + std::to_string(store.size()) + " documents but the index has "
                                + std::to_string(loaded.index.num_docs()));
                }
                loaded.store = std::move(store);
            }
            auto data = read_conll(it_conll);
            std::vector<Example> gold;
            if (!it_gold.empty()) {
                gold = read_conll(it_gold);
            }
            iterate::EntitySets seeds;
            if (!it_seeds.empty()) {
                std::ifstream in(it_seeds);
                seeds = iterate::seed_with_external_entities(data, in);
            }
            auto t = make_tagger(it_spec, g.workers, !it_no_ctx, in_flight, timeout_ms);
            iterate::PipelineConfig pc{it_ret.config(), it_aug.config(), g.workers};
            auto trace = iterate::run_until_saturation(data, loaded.index, loaded.store, *t, pc, sat,
                                                       gold.empty() ? nullptr : &gold,
                                                       it_seeds.empty() ? nullptr : &seeds);
            std::filesystem::create_directories(it_out);
            std::string summary = "iteration\tchange_ratio\tmacro_f1\n";
            for (std::size_t i = 0; i < trace.iterations.size(); ++i) {
                auto const& rec = trace.iterations[i];
                auto stem = it_out + "/iter_" + std::to_string(i + 1);
                binary::write_file(stem + ".conll", corpus::write_conll(iterate::with_labels(data, rec.predictions)));
                write_jsonl(stem + ".entities.jsonl", entity_records(data, rec.entities));
                char line[96];
                std::snprintf(line, sizeof line, "%zu\t%.6f\t%s\n", i + 1, rec.change_ratio,
                              rec.report ? eval::fmt4(rec.report->macro_f1).c_str() : "-");
                summary += line;
            }
            binary::write_file(it_out + "/summary.tsv", summary);
            out << summary;
        };
    });

    // eval
    auto* ev = app.add_subcommand("eval", "Strict span-level evaluation");
    std::string ev_gold, ev_pred, ev_out;
    std::size_t ev_lengthwise = 0;
    bool ev_confusion = false;
    ev->add_option("--gold", ev_gold, "Gold CoNLL")->required()->check(CLI::ExistingFile);
    ev->add_option("--pred", ev_pred, "Predicted CoNLL")->required()->check(CLI::ExistingFile);
    ev->add_option("--lengthwise", ev_lengthwise, "Also report per sentence length up to this length");
    ev->add_flag("--confusion", ev_confusion, "Also report the boundary-exact type confusion matrix");
    ev->add_option("--out", ev_out, "Report directory")->required();
    ev->callback([&] {
        action = [&] {
            auto gold = read_conll(ev_gold);
            auto pred = read_conll(ev_pred);
            auto r = eval::report(gold, pred);
            std::filesystem::create_directories(ev_out);
            auto txt = eval::format_report(r);
            binary::write_file(ev_out + "/report.txt", txt);
            binary::write_file(ev_out + "/report.csv", eval::report_csv(r));
            out << txt;
            if (ev_lengthwise > 0) {
                auto lw = eval::lengthwise(gold, pred, ev_lengthwise);
                binary::write_file(ev_out + "/lengthwise.txt", eval::format_lengthwise(lw));
                binary::write_file(ev_out + "/lengthwise.csv", eval::lengthwise_csv(lw));
                out << '\n' << eval::format_lengthwise(lw);
            }
            if (ev_confusion) {
                auto m = eval::confusion(gold, pred);
                binary::write_file(ev_out + "/confusion.txt", eval::format_confusion(m));
                binary::write_file(ev_out + "/confusion.csv", eval::confusion_csv(m));
                out << '\n' << eval::format_confusion(m);
            }
        };
    });

    // prompt
    auto* prompt = app.add_subcommand("prompt", "Few-shot prompts and generation parsing for LLMs");
    prompt->require_subcommand(1);
    auto* pbuild = prompt->add_subcommand("build", "Assemble few-shot prompts with retrieved context");
    std::string pb_conll, pb_idx, pb_shots, pb_out, pb_system, pb_instruction;
    std::size_t pb_budget = llm_io::llama3_budget;
    std::size_t pb_k = 10;
    bool pb_no_ra = false;
    pbuild->add_option("--conll", pb_conll, "Examples")->required()->check(CLI::ExistingFile);
    pbuild->add_option("--idx", pb_idx, "Index file (required unless --no-ra)")->check(CLI::ExistingFile);
    pbuild->add_option("--budget", pb_budget, "Prompt budget in whitespace tokens (3100, 7680, 16385)")
        ->capture_default_str();
    pbuild->add_option("--shots", pb_shots, "Demonstrations JSONL {sentence, entities}")->check(CLI::ExistingFile);
    pbuild->add_option("--system-file", pb_system, "System prompt text")->check(CLI::ExistingFile);
    pbuild->add_option("--instruction-file", pb_instruction, "Instruction text")->check(CLI::ExistingFile);
    pbuild->add_option("--k-sentence", pb_k, "Top documents from sentence retrieval")->capture_default_str();
    pbuild->add_flag("--no-ra", pb_no_ra, "Omit retrieved context");
    pbuild->add_option("--out", pb_out, "Prompt JSONL")->required();
    pbuild->callback([&] {
        action = [&] {
            auto data = read_conll(pb_conll);
            llm_io::PromptSpec spec;
            spec.system_prompt = read_text_or(pb_system, default_system_prompt);
            spec.instruction = read_text_or(pb_instruction, default_instruction);
            spec.window_budget = pb_budget;
            spec.ra_enabled = !pb_no_ra;
            if (!pb_shots.empty()) {
                for (auto const& j : read_jsonl(pb_shots)) {
                    spec.shots.push_back({j.at("sentence").get<std::string>(), j.at("entities").get<std::string>()});
                }
            }
            std::optional<kb::LoadedIndex> loaded;
            if (spec.ra_enabled) {
                if (pb_idx.empty()) {
                    throw error("--idx is required unless --no-ra is given");
                }
                loaded = kb::load_index(pb_idx);
            }
            retrieval::RetrievalConfig rc;
            rc.k_sentence = pb_k;
            rc.validate();
            std::vector<nlohmann::json> records(data.size());
            parallel_for(data.size(), g.workers, [&](std::size_t i) {
                retrieval::RetrievedContext ctx;
                if (loaded) {
                    ctx = retrieval::retrieve_by_sentence(data[i], loaded->index, loaded->store, rc);
                }
                records[i] = {{"example_id", data[i].id},
                              {"prompt", llm_io::build_fewshot_prompt(data[i].tokens, ctx, spec)}};
            });
            write_jsonl(pb_out, records);
        };
    });
    auto* pparse = prompt->add_subcommand("parse", "Convert generations to BIO predictions");
    std::string pp_gen, pp_conll, pp_out, pp_syn;
    pparse->add_option("--generations", pp_gen, "JSONL {example_id, text}")->required()->check(CLI::ExistingFile);
    pparse->add_option("--conll", pp_conll, "Examples the generations belong to")->required()->check(CLI::ExistingFile);
    pparse->add_option("--out", pp_out, "Predicted CoNLL")->required();
    pparse->add_option("--synonyms", pp_syn, "Extra type synonyms, `synonym<TAB>TYPE` per line")
        ->check(CLI::ExistingFile);
    pparse->callback([&] {
        action = [&] {
            auto data = read_conll(pp_conll);
            llm_io::TypeSynonyms syn;
            if (!pp_syn.empty()) {
                std::istringstream in(binary::read_file(pp_syn));
                std::string line;
                std::size_t n = 0;
                while (std::getline(in, line)) {
                    ++n;
                    auto tab = line.rfind('\t');
                    if (text::trim(line).empty()) {
                        continue;
                    }
                    auto t = tab == std::string::npos ? std::nullopt : parse_entity_type(text::trim(line.substr(tab + 1)));
                    if (!t) {
                        throw parse_error("synonym line needs synonym<TAB>TYPE", n);
                    }
                    syn.add(line.substr(0, tab), *t);
                }
            }
            std::map<std::string, std::string> gens;
            for (auto const& j : read_jsonl(pp_gen)) {
                auto const& id = j.at("example_id");
                gens[id.is_string() ? id.get<std::string>() : id.dump()] = j.at("text").get<std::string>();
            }
            std::vector<Example> pred;
            for (auto const& ex : data) {
                auto it = gens.find(ex.id);
                auto parsed = it == gens.end() ? llm_io::ParsedEntities{} : llm_io::parse_generation(it->second, syn);
                pred.push_back({ex.id, ex.tokens, llm_io::entities_to_bio(ex.tokens, parsed)});
            }
            binary::write_file(pp_out, corpus::write_conll(pred));
        };
    });

    // conformance
    auto* conf = app.add_subcommand("conformance", "Check an external tagger against the wire protocol");
    std::string conf_ep;
    std::size_t conf_requests = 200, conf_malformed = 50;
    conf->add_option("--endpoint", conf_ep, "stdio:<command> or tcp:<host>:<port>")->required();
    conf->add_option("--requests", conf_requests, "Random well-formed requests")->capture_default_str();
    conf->add_option("--malformed", conf_malformed, "Malformed lines")->capture_default_str();
    conf->add_option("--timeout-ms", timeout_ms, "Response timeout")->capture_default_str();
    int conf_rc = 0;
    conf->callback([&] {
        action = [&] {
            auto ch = tagger::open_endpoint(conf_ep);
            auto checks = tagger::run_conformance(*ch, conf_requests, conf_malformed, g.seed, timeout_ms);
            for (auto const& c : checks) {
                out << (c.passed ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : " (" + c.detail + ")")
                    << '\n';
                if (!c.passed) {
                    conf_rc = 1;
                }
            }
        };
    });

    // run
    auto* run = app.add_subcommand("run", "Execute a pipeline manifest and record hashes");
    std::string run_manifest, run_record;
    run->add_option("--manifest", run_manifest, "Manifest JSON")->required()->check(CLI::ExistingFile);
    run->add_option("--record", run_record, "Where to write the run record (default <manifest>.record.json)");
    int run_rc = 0;
    run->callback([&] { action = [&] { run_rc = detail::run_manifest(run_manifest, run_record, g, out, err); }; });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (CLI::CallForHelp const&) {
        out << app.help();
        return 0;
    } catch (CLI::CallForAllHelp const&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (CLI::CallForVersion const&) {
        out << tool_version << '\n';
        return 0;
    } catch (CLI::ParseError const& e) {
        err << "ra-ner: " << e.what() << "\nRun with --help for usage.\n";
        return 2;
    }

    try {
        if (action) {
            action();
        }
    } catch (std::exception const& e) {
        err << "ra-ner: " << e.what() << '\n';
        return 1;
    }
    return conf_rc ? conf_rc : run_rc;
}

}  // namespace ra_ner::cli
