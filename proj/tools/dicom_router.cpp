// dicom_router: command-line front end for the parser, pipeline, trainer,
// evaluation harness and routing service.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "dicomrouter/dicom/dump.hpp"
#include "dicomrouter/dicom/parser.hpp"
#include "dicomrouter/eval/bootstrap.hpp"
#include "dicomrouter/eval/confusion.hpp"
#include "dicomrouter/eval/latency.hpp"
#include "dicomrouter/eval/predictions_csv.hpp"
#include "dicomrouter/eval/report.hpp"
#include "dicomrouter/eval/split.hpp"
#include "dicomrouter/image/dicom_encode.hpp"
#include "dicomrouter/image/pipeline.hpp"
#include "dicomrouter/image/png.hpp"
#include "dicomrouter/nn/backend.hpp"
#include "dicomrouter/nn/router_net.hpp"
#include "dicomrouter/nn/synthetic.hpp"
#include "dicomrouter/nn/trainer.hpp"
#include "dicomrouter/nn/weights_io.hpp"
#include "dicomrouter/service/config.hpp"
#include "dicomrouter/service/router.hpp"
#include "dicomrouter/service/server.hpp"
#include "dicomrouter/service/watcher.hpp"
#include "dicomrouter/simd/kernels.hpp"

namespace fs = std::filesystem;
using namespace dicomrouter;

namespace {

std::vector<std::uint8_t> read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + p.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& p, std::span<const std::uint8_t> bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("cannot write " + p.string());
}

void write_text(const fs::path& p, const std::string& text) {
    write_file(p, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

// "file,label" manifest written by make-synth. Paths are relative to the
// manifest's directory.
struct ManifestEntry {
    fs::path file;
    nn::BodyPartClass label;
};

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest " + path.string());
    std::vector<ManifestEntry> out;
    std::string line;
    std::getline(in, line);
    if (line != "file,label") throw std::runtime_error(path.string() + ": expected header 'file,label'");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.rfind(',');
        if (comma == std::string::npos) throw std::runtime_error("bad manifest line: " + line);
        const auto cls = nn::parse_body_part(line.substr(comma + 1));
        if (!cls) throw std::runtime_error("bad label in manifest line: " + line);
        out.push_back({path.parent_path() / line.substr(0, comma), *cls});
    }
    return out;
}

std::vector<nn::LabeledExample> load_manifest_examples(const fs::path& manifest, std::size_t size) {
    std::vector<nn::LabeledExample> out;
    for (const auto& e : read_manifest(manifest)) {
        out.push_back({image::preprocess(read_file(e.file), size), e.label});
    }
    return out;
}

std::shared_ptr<const nn::Backend> load_backend(const fs::path& weights, std::size_t input_size) {
    return std::make_shared<nn::RouterNetBackend>(nn::load_weights_file(weights), input_size);
}

std::string format_probs(const nn::Probabilities& p) {
    std::string out;
    char buf[32];
    for (std::size_t k = 0; k < p.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%s%.4f", k ? " " : "", p[k]);
        out += buf;
    }
    return out;
}

std::vector<std::uint64_t> parse_sizes(const std::string& text) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) out.push_back(std::stoull(part));
    return out;
}

void print_decision(const service::RoutingDecision& d) {
    std::cout << service::to_json_line(d.audit_record()) << '\n';
    if (!d.detail.empty()) std::cerr << "  " << d.detail << '\n';
}

// Blocks until SIGINT or SIGTERM. Signals must already be blocked in every
// thread (see block_shutdown_signals).
void wait_for_shutdown_signal() {
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    int sig = 0;
    sigwait(&set, &sig);
}

void block_shutdown_signals() {
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DICOM body-part router"};
    app.require_subcommand(1);
    std::string simd_choice;
    app.add_option("--simd", simd_choice, "Kernel variant: scalar or avx2 (default: best available)")
        ->check(CLI::IsMember({"scalar", "avx2"}));

    // dump
    auto* dump_cmd = app.add_subcommand("dump", "Print every data element of a DICOM file");
    std::string dump_file;
    dump_cmd->add_option("file", dump_file)->required();

    // render
    auto* render_cmd = app.add_subcommand("render", "Preprocess a DICOM file and write a PNG");
    std::string render_in, render_out;
    std::size_t render_size = image::kModelInputSize;
    render_cmd->add_option("file", render_in)->required();
    render_cmd->add_option("-o,--out", render_out)->required();
    render_cmd->add_option("--size", render_size);

    // make-synth
    auto* synth_cmd = app.add_subcommand("make-synth", "Write a synthetic five-pattern DICOM dataset");
    std::string synth_dir;
    std::size_t synth_n = 10, synth_size = 64;
    std::uint64_t synth_seed = 0;
    bool synth_png = false;
    synth_cmd->add_option("-o,--out-dir", synth_dir)->required();
    synth_cmd->add_option("--n-per-class", synth_n);
    synth_cmd->add_option("--size", synth_size);
    synth_cmd->add_option("--seed", synth_seed);
    synth_cmd->add_flag("--png", synth_png, "Also write PNG renditions");

    // train
    auto* train_cmd = app.add_subcommand("train", "Train RouterNet-mu");
    std::string train_out, train_manifest, val_manifest, history_csv;
    std::size_t train_per_class = 200, val_per_class = 50, train_size = 64;
    nn::TrainConfig tc;
    tc.seed = 1;
    std::uint64_t data_seed = 1;
    train_cmd->add_option("-o,--out", train_out, "Weight file to write")->required();
    train_cmd->add_option("--train-manifest", train_manifest, "file,label CSV (default: synthetic data)");
    train_cmd->add_option("--val-manifest", val_manifest);
    train_cmd->add_option("--train-per-class", train_per_class);
    train_cmd->add_option("--val-per-class", val_per_class);
    train_cmd->add_option("--image-size", train_size);
    train_cmd->add_option("--epochs", tc.epochs);
    train_cmd->add_option("--batch-size", tc.batch_size);
    train_cmd->add_option("--lr", tc.schedule.eta_max);
    train_cmd->add_option("--t0", tc.schedule.t0);
    train_cmd->add_option("--t-mult", tc.schedule.t_mult);
    train_cmd->add_option("--seed", tc.seed, "Initialisation and shuffling seed");
    train_cmd->add_option("--data-seed", data_seed, "Synthetic data seed (validation uses seed+1)");
    train_cmd->add_option("--history", history_csv, "Per-epoch CSV");
    std::string reduction = "mean";
    train_cmd->add_option("--reduction", reduction)->check(CLI::IsMember({"mean", "sum"}));

    // predict
    auto* predict_cmd = app.add_subcommand("predict", "Classify DICOM files");
    std::vector<std::string> predict_files;
    std::string predict_weights, predict_manifest, predict_csv;
    std::size_t predict_size = image::kModelInputSize;
    predict_cmd->add_option("files", predict_files);
    predict_cmd->add_option("-w,--weights", predict_weights)->required();
    predict_cmd->add_option("--input-size", predict_size);
    predict_cmd->add_option("--manifest", predict_manifest, "Labelled file list; enables --csv");
    predict_cmd->add_option("--csv", predict_csv, "Write id,label,pred,p0..p4");

    // split
    auto* split_cmd = app.add_subcommand("split", "Stratified 70/15/15 split");
    std::string split_sizes = "1179,3292,6218,2228,3176";
    std::uint64_t split_seed = 0;
    split_cmd->add_option("--class-sizes", split_sizes, "Comma-separated class sizes");
    split_cmd->add_option("--seed", split_seed);

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "Metrics and bootstrap CIs from a predictions CSV");
    std::string eval_csv, eval_model = "RouterNet-mu", eval_report_csv;
    std::size_t eval_iterations = eval::kDefaultBootstrapIterations;
    std::uint64_t eval_seed = 0;
    double eval_latency = 0.0;
    std::size_t eval_params = nn::router_net_architecture().parameter_count();
    eval_cmd->add_option("predictions", eval_csv)->required();
    eval_cmd->add_option("--model", eval_model);
    eval_cmd->add_option("--iterations", eval_iterations);
    eval_cmd->add_option("--seed", eval_seed);
    eval_cmd->add_option("--inference-time", eval_latency, "Seconds per image for the report");
    eval_cmd->add_option("--parameters", eval_params);
    eval_cmd->add_option("--report-csv", eval_report_csv);

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "CPU latency of RouterNet-mu");
    std::string bench_weights;
    std::size_t bench_size = image::kModelInputSize, bench_n = 20, bench_warmup = 5;
    std::uint64_t bench_seed = 0;
    bench_cmd->add_option("-w,--weights", bench_weights, "Default: random weights from --seed");
    bench_cmd->add_option("--input-size", bench_size);
    bench_cmd->add_option("-n,--images", bench_n);
    bench_cmd->add_option("--warmup", bench_warmup);
    bench_cmd->add_option("--seed", bench_seed);

    // service
    std::string config_path;
    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API (and the watcher if configured)");
    serve_cmd->add_option("-c,--config", config_path)->required();
    auto* ingest_cmd = app.add_subcommand("ingest", "Route one file through the configured router");
    std::string ingest_file;
    ingest_cmd->add_option("file", ingest_file)->required();
    ingest_cmd->add_option("-c,--config", config_path)->required();
    auto* watch_cmd = app.add_subcommand("watch", "Watch a directory and route new files");
    std::string watch_dir;
    watch_cmd->add_option("dir", watch_dir, "Default: watch_dir from the config");
    watch_cmd->add_option("-c,--config", config_path)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (simd_choice == "scalar") simd::select_isa(simd::Isa::scalar);
        if (simd_choice == "avx2") simd::select_isa(simd::Isa::avx2);

        if (*dump_cmd) {
            std::cout << dicom::dump(dicom::parse_file(read_file(dump_file)));
            return 0;
        }

        if (*render_cmd) {
            const auto img = image::preprocess(read_file(render_in), render_size);
            write_file(render_out, image::export_png(img));
            return 0;
        }

        if (*synth_cmd) {
            fs::create_directories(synth_dir);
            const auto data = nn::make_synthetic_dataset(synth_n, synth_size, synth_seed);
            std::string manifest = "file,label\n";
            for (std::size_t i = 0; i < data.size(); ++i) {
                char name[64];
                std::snprintf(name, sizeof name, "synth_%05zu", i);
                image::DicomEncodeOptions opt;
                opt.sop_instance_uid = "2.25." + std::to_string(synth_seed) + "." + std::to_string(i + 1);
                opt.transfer_syntax = i % 2 ? dicom::TransferSyntax::ImplicitVRLittleEndian
                                            : dicom::TransferSyntax::ExplicitVRLittleEndian;
                write_file(fs::path(synth_dir) / (std::string(name) + ".dcm"),
                           image::encode_as_dicom(data[i].image, opt));
                if (synth_png) {
                    write_file(fs::path(synth_dir) / (std::string(name) + ".png"),
                               image::export_png(data[i].image));
                }
                manifest += std::string(name) + ".dcm," + std::to_string(nn::code(data[i].label)) + "\n";
            }
            write_text(fs::path(synth_dir) / "manifest.csv", manifest);
            std::cout << "wrote " << data.size() << " files to " << synth_dir << '\n';
            return 0;
        }

        if (*train_cmd) {
            tc.reduction = reduction == "sum" ? nn::Reduction::Sum : nn::Reduction::Mean;
            const auto train_set = train_manifest.empty()
                                       ? nn::make_synthetic_dataset(train_per_class, train_size, data_seed)
                                       : load_manifest_examples(train_manifest, train_size);
            const auto val_set = val_manifest.empty()
                                     ? nn::make_synthetic_dataset(val_per_class, train_size, data_seed + 1)
                                     : load_manifest_examples(val_manifest, train_size);
            std::string history = "epoch,train_loss,val_accuracy,val_loss,lr_start,steps\n";
            const auto result = nn::train(train_set, val_set, tc, [&](const nn::EpochRecord& r) {
                char line[160];
                std::snprintf(line, sizeof line, "%zu,%.9g,%.9g,%.9g,%.9g,%zu\n", r.epoch, r.train_loss,
                              r.val_accuracy, r.val_loss, r.lr_start, r.steps);
                history += line;
                std::cerr << "epoch " << r.epoch << "  loss " << r.train_loss << "  val_acc "
                          << r.val_accuracy << '\n';
            });
            nn::save_weights_file(result.params, train_out);
            if (!history_csv.empty()) write_text(history_csv, history);
            std::cout << "best epoch " << result.best_epoch << " val_acc " << result.best_val_accuracy
                      << " -> " << train_out << '\n';
            return 0;
        }

        if (*predict_cmd) {
            const auto backend = load_backend(predict_weights, predict_size);
            std::vector<std::pair<fs::path, std::optional<nn::BodyPartClass>>> inputs;
            for (const auto& f : predict_files) inputs.emplace_back(f, std::nullopt);
            if (!predict_manifest.empty()) {
                for (const auto& e : read_manifest(predict_manifest)) inputs.emplace_back(e.file, e.label);
            }
            std::vector<eval::PredictionRow> rows;
            for (const auto& [file, label] : inputs) {
                const auto p = backend->predict(image::preprocess(read_file(file), predict_size));
                std::cout << file.string() << '\t' << nn::to_string(p.cls) << '\t'
                          << format_probs(p.probabilities) << '\n';
                if (label) {
                    rows.push_back({file.stem().string(), nn::code(*label), nn::code(p.cls), p.probabilities});
                }
            }
            if (!predict_csv.empty()) write_text(predict_csv, eval::write_predictions_csv(rows));
            return 0;
        }

        if (*split_cmd) {
            const auto sizes = parse_sizes(split_sizes);
            std::vector<int> labels;
            for (std::size_t c = 0; c < sizes.size(); ++c) labels.insert(labels.end(), sizes[c], static_cast<int>(c));
            const auto split = eval::stratified_split(labels, {{0.7, 0.15, 0.15}, split_seed});
            std::vector<std::array<std::size_t, 3>> counts(sizes.size());
            for (const auto i : split.train) ++counts[static_cast<std::size_t>(labels[i])][0];
            for (const auto i : split.val) ++counts[static_cast<std::size_t>(labels[i])][1];
            for (const auto i : split.test) ++counts[static_cast<std::size_t>(labels[i])][2];
            std::cout << "class,train,val,test,total\n";
            for (std::size_t c = 0; c < sizes.size(); ++c) {
                const std::string name = c < nn::kNumClasses ? std::string(nn::to_string(nn::kAllClasses[c]))
                                                             : std::to_string(c);
                std::cout << name << ',' << counts[c][0] << ',' << counts[c][1] << ',' << counts[c][2] << ','
                          << sizes[c] << '\n';
            }
            std::cout << "all," << split.train.size() << ',' << split.val.size() << ',' << split.test.size()
                      << ',' << labels.size() << '\n';
            return 0;
        }

        if (*eval_cmd) {
            const auto rows = eval::read_predictions_file(eval_csv);
            std::vector<int> preds, labels;
            for (const auto& r : rows) {
                preds.push_back(r.pred);
                labels.push_back(r.label);
            }
            const auto cm = eval::confusion_matrix(preds, labels);
            std::cout << "confusion matrix (rows = actual, columns = predicted)\n";
            for (std::size_t a = 0; a < nn::kNumClasses; ++a) {
                std::printf("%-16s", std::string(nn::to_string(nn::kAllClasses[a])).c_str());
                for (std::size_t p = 0; p < nn::kNumClasses; ++p) {
                    std::printf(" %6llu", static_cast<unsigned long long>(cm.counts[a][p]));
                }
                std::printf("\n");
            }
            std::printf("\n%-16s %9s %9s %9s %7s\n", "class", "precision", "recall", "f1", "support");
            for (std::size_t k = 0; k < nn::kNumClasses; ++k) {
                const auto m = eval::precision_recall_f1(cm, k);
                std::printf("%-16s %9.4f %9.4f %9.4f %7llu%s\n",
                            std::string(nn::to_string(nn::kAllClasses[k])).c_str(), m.precision, m.recall,
                            m.f1, static_cast<unsigned long long>(m.support), m.degenerate ? "  (degenerate)" : "");
            }
            std::printf("\naccuracy %.4f\n\n", cm.accuracy());
            eval::ModelResult mr;
            mr.model = eval_model;
            mr.recall = eval::bootstrap_ci(preds, labels, eval::metrics::macro_recall, eval_iterations, 0.95, eval_seed);
            mr.precision =
                eval::bootstrap_ci(preds, labels, eval::metrics::macro_precision, eval_iterations, 0.95, eval_seed);
            mr.f1 = eval::bootstrap_ci(preds, labels, eval::metrics::macro_f1, eval_iterations, 0.95, eval_seed);
            mr.inference_s = eval_latency;
            mr.parameters = eval_params;
            const std::vector<eval::ModelResult> results{mr};
            std::cout << eval::emit_report(results);
            if (!eval_report_csv.empty()) write_text(eval_report_csv, eval::emit_report_csv(results));
            return 0;
        }

        if (*bench_cmd) {
            auto params = bench_weights.empty() ? nn::init_router_net<float>(bench_seed)
                                                : nn::load_weights_file(bench_weights);
            const nn::RouterNetBackend backend(std::move(params), bench_size);
            const auto data = nn::make_synthetic_dataset((bench_n + nn::kNumClasses - 1) / nn::kNumClasses,
                                                         bench_size, bench_seed);
            std::vector<image::ImageTensor> images;
            for (std::size_t i = 0; i < bench_n; ++i) images.push_back(data[i].image);
            const auto report = eval::latency_benchmark(backend, images, bench_warmup);
            std::printf("routernet-mu %zux%zu  isa=%s  images=%zu  warmup=%zu  mean=%.6f s/image\n", bench_size,
                        bench_size, std::string(simd::to_string(simd::active_kernels().isa)).c_str(),
                        report.samples_s.size(), report.warmup, report.mean_s);
            return 0;
        }

        if (*serve_cmd || *ingest_cmd || *watch_cmd) {
            auto config = service::load_config(config_path);
            service::apply_env_overrides(config);
            std::shared_ptr<const nn::Backend> backend;
            if (config.weights && fs::exists(*config.weights)) {
                backend = load_backend(*config.weights, config.input_size);
            } else if (!*serve_cmd) {
                throw std::runtime_error("config has no loadable weights file");
            } else {
                std::cerr << "warning: no weights loaded; classify/ingest will return 503\n";
            }
            service::Router router(config, backend);

            if (*ingest_cmd) {
                print_decision(router.ingest_file(ingest_file));
                return 0;
            }

            block_shutdown_signals();
            const fs::path dir = !watch_dir.empty() ? fs::path(watch_dir) : config.watch_dir;
            std::unique_ptr<service::Watcher> watcher;
            if (*watch_cmd || (!dir.empty() && backend)) {
                if (dir.empty()) throw std::runtime_error("no watch directory given");
                service::WatchOptions wo;
                wo.poll_interval = std::chrono::milliseconds(static_cast<long>(config.poll_interval_s * 1000));
                wo.workers = config.workers;
                watcher = std::make_unique<service::Watcher>(
                    dir, [&router](const fs::path& p) { print_decision(router.ingest_file(p)); }, wo);
                watcher->start();
                std::cerr << "watching " << dir.string() << '\n';
            }

            if (*watch_cmd) {
                wait_for_shutdown_signal();
                watcher->stop();
                return 0;
            }

            service::Server server(router);
            const auto [host, port] = service::split_listen(config.listen);
            std::thread stopper([&server] {
                wait_for_shutdown_signal();
                server.stop();
            });
            std::cerr << "listening on " << config.listen << '\n';
            const bool ok = server.listen(host, port);
            if (!ok) {
                std::cerr << "cannot listen on " << config.listen << '\n';
                std::raise(SIGTERM);
            }
            stopper.join();
            if (watcher) watcher->stop();
            return ok ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
