// timr: transposition-invariant music representations.
//
// Subcommands wire ingestion, training, mapping, analysis and discovery
// into reproducible pipelines over one flat container format. Every
// command is deterministic given its flags; --seed is accepted wherever
// randomness exists.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "timr/analysis.hpp"
#include "timr/audio.hpp"
#include "timr/config.hpp"
#include "timr/container.hpp"
#include "timr/discovery.hpp"
#include "timr/gae.hpp"
#include "timr/symbolic.hpp"
#include "timr/trainer.hpp"

namespace fs = std::filesystem;
using timr::Matrix;
using timr::Vec;

namespace {

std::vector<std::uint8_t> read_file_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return bytes;
}

struct Piece {
    fs::path path;
    Matrix frames;
    timr::io::Dtype dtype;
};

std::vector<Piece> load_pieces(const std::vector<std::string>& paths) {
    std::vector<Piece> pieces;
    for (const auto& p : paths) {
        Piece piece;
        piece.path = p;
        piece.frames = timr::io::read_container_file(p, &piece.dtype);
        pieces.push_back(std::move(piece));
    }
    return pieces;
}

// Trajectory of mapping codes: one row per context/target pair, so a piece
// of T frames yields T - L rows.
Matrix map_trajectory(const timr::gae::GaeParams& params, const timr::gae::ModelConfig& mc,
                      const Matrix& frames) {
    if (frames.cols() != mc.input_dim)
        throw std::runtime_error("piece has " + std::to_string(frames.cols()) + " columns, model expects " +
                                 std::to_string(mc.input_dim));
    const auto pairs = timr::train::make_pairs(frames, mc.context_frames);
    if (pairs.empty())
        throw std::runtime_error("piece too short: need at least " + std::to_string(mc.context_frames + 1) +
                                 " frames, got " + std::to_string(frames.rows()));
    Matrix traj(pairs.size(), mc.map_dim_2);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto m = timr::gae::infer_mapping(params, pairs[i]);
        std::copy(m.begin(), m.end(), traj.row(i));
    }
    return traj;
}

// Random in-range transposition: shifts every frame of the pair by delta
// chosen so no active bit wraps around.
timr::gae::ContextPair transpose_pair(const timr::gae::ContextPair& pair, timr::Rng& rng, int max_shift) {
    const int p = static_cast<int>(pair.target.size());
    int lo = p, hi = -1;
    auto scan = [&](const double* row, int n) {
        for (int i = 0; i < n; ++i)
            if (row[i] != 0.0) {
                lo = std::min(lo, i);
                hi = std::max(hi, i);
            }
    };
    for (std::size_t l = 0; l < pair.context.rows(); ++l) scan(pair.context.row(l), p);
    scan(pair.target.data(), p);
    if (hi < 0) return pair; // silent pair
    const int down = std::min(lo, max_shift);
    const int up = std::min(p - 1 - hi, max_shift);
    const int delta = static_cast<int>(rng.uniform_int(-down, up));
    timr::gae::ContextPair out;
    // shift() moves content toward lower indices for positive delta, so a
    // transposition *up* by delta is shift(x, -delta)
    out.context = timr::gae::shift_frames(pair.context, -delta);
    out.target = timr::gae::shift(pair.target, -delta);
    return out;
}

int cmd_ingest_midi(const std::vector<std::string>& inputs, const std::string& out) {
    const bool out_is_dir = inputs.size() > 1;
    if (out_is_dir) fs::create_directories(out);
    for (const auto& input : inputs) {
        const auto bytes = read_file_bytes(input);
        const auto data = timr::symbolic::parse_auto(bytes);
        if (data.notes.empty()) throw std::runtime_error(input + ": no notes");
        const auto res = timr::symbolic::to_pianoroll(data.notes, data.ticks_per_quarter);
        const fs::path dest = out_is_dir ? fs::path(out) / (fs::path(input).stem().string() + ".timr")
                                         : fs::path(out);
        timr::io::write_container_file(dest, res.roll.frames, timr::io::Dtype::Binary);
        std::cout << input << ": " << data.notes.size() << " notes, " << res.roll.frames.rows()
                  << " frames";
        if (res.dropped_notes) std::cout << ", " << res.dropped_notes << " notes outside [36,95] dropped";
        std::cout << " -> " << dest.string() << "\n";
    }
    return 0;
}

int cmd_ingest_audio(const std::string& input, const std::string& out, double rate) {
    const auto bytes = read_file_bytes(input);
    auto buf = timr::audio::read_wav(bytes);
    if (buf.sample_rate != rate) buf = timr::audio::resample_linear(buf, rate);
    const auto spec = timr::audio::contrast_normalize(timr::audio::cqt(buf));
    timr::io::write_container_file(out, spec.frames, timr::io::Dtype::F32);
    std::cout << input << ": " << buf.samples.size() << " samples @ " << buf.sample_rate << " Hz, "
              << spec.frames.rows() << " frames x " << spec.frames.cols() << " bins -> " << out << "\n";
    return 0;
}

struct TrainArgs {
    std::vector<std::string> data;
    std::string out;
    std::string config_path;
    std::string trace_path;
    std::optional<std::uint64_t> seed;
    std::optional<long> steps;
};

int cmd_train(const TrainArgs& args) {
    timr::io::RunConfig rc;
    if (!args.config_path.empty()) rc.load(args.config_path);
    if (args.seed) rc.seed = *args.seed;
    if (args.steps) rc.total_steps = *args.steps;

    const auto pieces = load_pieces(args.data);
    if (pieces.empty()) throw std::runtime_error("train: no data");
    const bool binary = pieces.front().dtype == timr::io::Dtype::Binary;
    for (const auto& p : pieces)
        if ((p.dtype == timr::io::Dtype::Binary) != binary)
            throw std::runtime_error("train: mixed binary and real containers");

    const auto defaults = binary ? timr::gae::ModelConfig::symbolic_defaults()
                                 : timr::gae::ModelConfig::audio_defaults();
    const auto mc = rc.model_config(defaults);
    const auto tc = rc.train_config();

    for (const auto& p : pieces)
        if (p.frames.cols() != mc.input_dim)
            throw std::runtime_error(p.path.string() + ": " + std::to_string(p.frames.cols()) +
                                     " columns, model expects " + std::to_string(mc.input_dim));

    std::vector<timr::gae::ContextPair> corpus;
    std::size_t skipped = 0;
    for (const auto& p : pieces) {
        auto pairs = timr::train::make_pairs(p.frames, mc.context_frames);
        if (pairs.empty()) {
            std::cerr << "warning: " << p.path.string() << " shorter than " << mc.context_frames + 1
                      << " frames, skipped\n";
            ++skipped;
            continue;
        }
        for (auto& pair : pairs) corpus.push_back(std::move(pair));
    }
    if (corpus.empty()) throw std::runtime_error("train: no usable pieces");

    std::cout << "training on " << corpus.size() << " pairs from " << pieces.size() - skipped
              << " pieces (" << (binary ? "binary" : "real") << ", P=" << mc.input_dim
              << ", F=" << mc.factor_dim << "), " << tc.total_steps << " steps\n";

    const auto report = timr::train::train(corpus, mc, tc);
    timr::gae::save_checkpoint(args.out, mc, report.params);
    std::cout << "checkpoint -> " << args.out << " (" << report.wall_seconds << " s)\n";

    if (!args.trace_path.empty()) {
        std::ofstream trace(args.trace_path);
        if (!trace) throw std::runtime_error("cannot open " + args.trace_path);
        trace << "step,lr,data_loss,reg_loss\n";
        for (long s = 0; s < report.steps; ++s)
            trace << s << "," << report.lr[s] << "," << report.data_loss[s] << "," << report.reg_loss[s]
                  << "\n";
        std::cout << "trace -> " << args.trace_path << "\n";
    }
    return 0;
}

int cmd_map(const std::string& model, const std::string& in, const std::string& out) {
    const auto ck = timr::gae::load_checkpoint(model);
    const auto piece = timr::io::read_container_file(in);
    const Matrix traj = map_trajectory(ck.params, ck.config, piece);
    timr::io::write_container_file(out, traj, timr::io::Dtype::F64);
    std::cout << in << ": " << traj.rows() << " mapping rows x " << traj.cols() << " -> " << out << "\n";
    return 0;
}

int cmd_ssm(const std::string& in, const std::string& out, const std::string& pgm) {
    const auto traj = timr::io::read_container_file(in);
    const auto ssm = timr::discover::build_ssm(traj);
    if (ssm.degenerate) std::cout << "warning: degenerate SSM (constant similarity)\n";
    if (!out.empty()) timr::io::write_container_file(out, ssm.x, timr::io::Dtype::F64);
    if (!pgm.empty()) timr::io::write_pgm_file(pgm, ssm.x);
    std::cout << in << ": " << ssm.x.rows() << "x" << ssm.x.cols() << " SSM\n";
    return 0;
}

struct DiscoverArgs {
    std::string model, in, out, ssm_pgm, config_path;
    std::optional<double> gamma;
    std::optional<std::size_t> min_len, merge_tol;
    bool audio = false;
    double sample_rate = 22050.0;
    std::size_t hop = 1984;
};

int cmd_discover(const DiscoverArgs& args) {
    timr::io::RunConfig rc;
    if (!args.config_path.empty()) rc.load(args.config_path);

    const auto ck = timr::gae::load_checkpoint(args.model);
    timr::io::Dtype piece_dtype;
    const auto piece = timr::io::read_container_file(args.in, &piece_dtype);
    const bool audio = args.audio || piece_dtype != timr::io::Dtype::Binary;

    const double gamma = args.gamma ? *args.gamma : rc.gamma ? *rc.gamma : (audio ? 0.81 : 0.9);
    const std::size_t min_len = args.min_len ? *args.min_len : rc.min_len ? *rc.min_len : (audio ? 36 : 32);
    const std::size_t merge_tol =
        args.merge_tol ? *args.merge_tol : rc.merge_tol ? *rc.merge_tol : (audio ? 9 : 8);

    const Matrix traj = map_trajectory(ck.params, ck.config, piece);
    const auto ssm = timr::discover::build_ssm(traj);
    if (ssm.degenerate) std::cout << "warning: degenerate SSM (constant similarity)\n";
    if (!args.ssm_pgm.empty()) timr::io::write_pgm_file(args.ssm_pgm, ssm.x);

    const auto hits = timr::discover::trace_diagonals(ssm.x, gamma);
    auto groups = timr::discover::extract_groups(hits, min_len, merge_tol);

    // trajectory row i covers frames [i, i+L], so a run of rows [a, b)
    // spans frames [a, b + L)
    const std::size_t l_frames = ck.config.context_frames;
    for (auto& g : groups)
        for (auto& o : g.occurrences) o.end += l_frames;

    const std::string text = audio ? timr::discover::format_sections(groups, args.sample_rate, args.hop)
                                   : timr::discover::format_sections(groups);
    if (args.out.empty()) std::cout << text;
    else {
        std::ofstream out(args.out);
        if (!out) throw std::runtime_error("cannot open " + args.out);
        out << text;
    }
    std::cout << hits.size() << " diagonal hits, " << groups.size() << " groups (gamma=" << gamma
              << ", min_len=" << min_len << ", merge_tol=" << merge_tol << ")\n";
    return 0;
}

struct KnnArgs {
    std::string model;
    std::vector<std::string> data;
    std::string out;
    std::string space = "both";
    std::size_t k = 10;
    std::size_t folds = 10;
    bool transpose = false;
    std::uint64_t seed = 0;
    std::size_t max_pairs = 0;
};

int cmd_eval_knn(const KnnArgs& args) {
    const auto ck = timr::gae::load_checkpoint(args.model);
    const auto pieces = load_pieces(args.data);

    std::vector<timr::gae::ContextPair> pairs;
    for (const auto& p : pieces)
        for (auto& pair : timr::train::make_pairs(p.frames, ck.config.context_frames))
            pairs.push_back(std::move(pair));
    if (pairs.empty()) throw std::runtime_error("eval-knn: no pairs");

    timr::Rng rng(args.seed);
    if (args.max_pairs && pairs.size() > args.max_pairs) {
        // deterministic subsample without replacement
        std::vector<timr::gae::ContextPair> sample;
        sample.reserve(args.max_pairs);
        for (std::size_t i = 0; i < pairs.size() && sample.size() < args.max_pairs; ++i) {
            const std::size_t remaining = pairs.size() - i;
            const std::size_t needed = args.max_pairs - sample.size();
            if (rng.uniform01() * static_cast<double>(remaining) < static_cast<double>(needed))
                sample.push_back(std::move(pairs[i]));
        }
        pairs = std::move(sample);
    }
    if (args.transpose)
        for (auto& pair : pairs) pair = transpose_pair(pair, rng, ck.config.shift_range);

    std::ofstream out(args.out);
    if (!out) throw std::runtime_error("cannot open " + args.out);
    out << "space,fold,precision,recall,f1,points,skipped_empty\n";

    auto run_space = [&](const std::string& name) {
        std::vector<timr::analysis::LabeledPoint> points;
        points.reserve(pairs.size());
        for (const auto& pair : pairs) {
            timr::analysis::LabeledPoint pt;
            pt.labels = timr::analysis::label_pair(pair);
            if (name == "mapping") {
                pt.features = timr::gae::infer_mapping(ck.params, pair);
            } else {
                pt.features = pair.context.data();
                pt.features.insert(pt.features.end(), pair.target.begin(), pair.target.end());
            }
            points.push_back(std::move(pt));
        }
        const auto report = timr::analysis::knn_crossval(points, args.k, args.folds);
        for (std::size_t f = 0; f < report.folds.size(); ++f) {
            const auto& fs_ = report.folds[f];
            const double f1 = (fs_.precision + fs_.recall) > 0
                                  ? 2 * fs_.precision * fs_.recall / (fs_.precision + fs_.recall)
                                  : 0.0;
            out << name << "," << f << "," << fs_.precision << "," << fs_.recall << "," << f1 << ","
                << fs_.points << "," << fs_.skipped_empty << "\n";
        }
        out << name << ",all," << report.precision << "," << report.recall << "," << report.f1 << ",,"
            << report.skipped_empty << "\n";
        std::cout << name << " space: precision " << report.precision << ", recall " << report.recall
                  << ", f1 " << report.f1 << "\n";
    };

    if (args.space == "mapping" || args.space == "both") run_space("mapping");
    if (args.space == "input" || args.space == "both") run_space("input");
    return 0;
}

int cmd_cluster_matrix(const std::string& model, const std::vector<std::string>& data,
                       const std::string& out, const std::string& pgm) {
    const auto ck = timr::gae::load_checkpoint(model);
    const auto pieces = load_pieces(data);
    std::vector<timr::analysis::LabeledPoint> points;
    for (const auto& p : pieces)
        for (const auto& pair : timr::train::make_pairs(p.frames, ck.config.context_frames)) {
            timr::analysis::LabeledPoint pt;
            pt.labels = timr::analysis::label_pair(pair);
            pt.features = timr::gae::infer_mapping(ck.params, pair);
            points.push_back(std::move(pt));
        }
    if (points.empty()) throw std::runtime_error("cluster-matrix: no pairs");

    const auto cdm = timr::analysis::cluster_distance_matrix(points);
    std::size_t missing = 0;
    for (bool p : cdm.present)
        if (!p) ++missing;
    if (missing) std::cout << "warning: " << missing << " interval labels have no members\n";

    std::ofstream csv(out);
    if (!csv) throw std::runtime_error("cannot open " + out);
    csv << "interval";
    for (std::size_t c = 0; c < cdm.dist.cols(); ++c)
        csv << "," << timr::analysis::ClusterDistanceMatrix::label_of_row(c);
    csv << "\n";
    for (std::size_t r = 0; r < cdm.dist.rows(); ++r) {
        csv << timr::analysis::ClusterDistanceMatrix::label_of_row(r);
        for (std::size_t c = 0; c < cdm.dist.cols(); ++c) csv << "," << cdm.dist(r, c);
        csv << "\n";
    }
    if (!pgm.empty()) {
        // bright = close, matching the usual rendering of these matrices
        Matrix img = cdm.dist;
        double hi = 0;
        for (double v : img.data()) hi = std::max(hi, v);
        for (double& v : img.data()) v = hi - v;
        timr::io::write_pgm_file(pgm, img);
    }
    std::cout << cdm.dist.rows() << "x" << cdm.dist.cols() << " cluster distance matrix -> " << out << "\n";
    return 0;
}

int cmd_sensitivity(const std::string& model, const std::vector<std::string>& data, const std::string& out) {
    const auto ck = timr::gae::load_checkpoint(model);
    const auto pieces = load_pieces(data);
    std::vector<timr::gae::ContextPair> pairs;
    for (const auto& p : pieces)
        for (auto& pair : timr::train::make_pairs(p.frames, ck.config.context_frames))
            pairs.push_back(std::move(pair));
    if (pairs.empty()) throw std::runtime_error("sensitivity: no pairs");

    const auto profile = timr::analysis::sensitivity(ck.params, pairs, ck.config.output_kind);
    std::ofstream csv(out);
    if (!csv) throw std::runtime_error("cannot open " + out);
    csv << "context_offset,sensitivity\n";
    for (std::size_t l = 0; l < profile.size(); ++l) {
        const int offset = static_cast<int>(l) - static_cast<int>(profile.size()) + 1;
        csv << offset << "," << profile[l] << "\n";
    }
    std::cout << "sensitivity profile over " << pairs.size() << " pairs -> " << out << "\n";
    return 0;
}

int cmd_eval_sections(const std::string& found_path, const std::string& truth_path, const std::string& out) {
    const auto found_bytes = read_file_bytes(found_path);
    const auto truth_bytes = read_file_bytes(truth_path);
    const auto found = timr::discover::parse_sections(
        std::string_view(reinterpret_cast<const char*>(found_bytes.data()), found_bytes.size()));
    const auto truth = timr::discover::parse_sections(
        std::string_view(reinterpret_cast<const char*>(truth_bytes.data()), truth_bytes.size()));
    const auto scores = timr::discover::evaluate_sections(found, truth);
    std::ostringstream csv;
    csv << "precision,recall,f1\n" << scores.precision << "," << scores.recall << "," << scores.f1 << "\n";
    if (!out.empty()) {
        std::ofstream f(out);
        if (!f) throw std::runtime_error("cannot open " + out);
        f << csv.str();
    }
    std::cout << csv.str();
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"transposition-invariant interval representations of music"};
    app.require_subcommand(1);

    // ingest-midi
    std::vector<std::string> im_inputs;
    std::string im_out;
    auto* im = app.add_subcommand("ingest-midi", "convert SMF or note-list files to piano-roll containers");
    im->add_option("inputs", im_inputs, "input files (.mid or note-list text)")->required();
    im->add_option("--out", im_out, "output container (or directory for multiple inputs)")->required();

    // ingest-audio
    std::string ia_in, ia_out;
    double ia_rate = 22050.0;
    auto* ia = app.add_subcommand("ingest-audio", "convert a WAV file to a CQT spectrogram container");
    ia->add_option("input", ia_in, "input WAV")->required();
    ia->add_option("--out", ia_out, "output container")->required();
    ia->add_option("--rate", ia_rate, "working sample rate (default 22050)");

    // train
    TrainArgs ta;
    std::uint64_t ta_seed = 0;
    long ta_steps = 0;
    auto* tr = app.add_subcommand("train", "train a model on piano-roll or spectrogram containers");
    tr->add_option("--data", ta.data, "training containers")->required();
    tr->add_option("--out", ta.out, "checkpoint path")->required();
    tr->add_option("--config", ta.config_path, "key=value config file");
    tr->add_option("--trace", ta.trace_path, "write per-step loss trace CSV");
    auto* ta_seed_opt = tr->add_option("--seed", ta_seed, "RNG seed (overrides config)");
    auto* ta_steps_opt = tr->add_option("--steps", ta_steps, "total SGD steps (overrides config)");

    // map
    std::string mp_model, mp_in, mp_out;
    auto* mp = app.add_subcommand("map", "project a piece into the mapping space");
    mp->add_option("--model", mp_model, "checkpoint")->required();
    mp->add_option("--in", mp_in, "piece container")->required();
    mp->add_option("--out", mp_out, "trajectory container")->required();

    // ssm
    std::string sm_in, sm_out, sm_pgm;
    auto* sm = app.add_subcommand("ssm", "self-similarity matrix of a mapping trajectory");
    sm->add_option("--in", sm_in, "trajectory container")->required();
    sm->add_option("--out", sm_out, "SSM container");
    sm->add_option("--pgm", sm_pgm, "grayscale PGM image");

    // discover
    DiscoverArgs da;
    double da_gamma = 0;
    std::size_t da_min_len = 0, da_merge_tol = 0;
    auto* dc = app.add_subcommand("discover", "find repeated (possibly transposed) sections");
    dc->add_option("--model", da.model, "checkpoint")->required();
    dc->add_option("--in", da.in, "piece container")->required();
    dc->add_option("--out", da.out, "sections text file (stdout if omitted)");
    dc->add_option("--config", da.config_path, "key=value config file");
    auto* da_gamma_opt = dc->add_option("--gamma", da_gamma, "diagonal score threshold (0.9 symbolic, 0.81 audio)");
    auto* da_min_opt = dc->add_option("--min-len", da_min_len, "minimum diagonal length in frames");
    auto* da_tol_opt = dc->add_option("--merge-tol", da_merge_tol, "boundary merge tolerance in frames");
    dc->add_flag("--audio", da.audio, "audio defaults and seconds-based output");
    dc->add_option("--ssm-pgm", da.ssm_pgm, "also write the SSM as PGM");

    // eval-knn
    KnnArgs ka;
    auto* ek = app.add_subcommand("eval-knn", "k-NN interval classification report");
    ek->add_option("--model", ka.model, "checkpoint")->required();
    ek->add_option("--data", ka.data, "piece containers")->required();
    ek->add_option("--out", ka.out, "report CSV")->required();
    ek->add_option("--space", ka.space, "mapping | input | both (default both)");
    ek->add_option("--k", ka.k, "neighbors (default 10)");
    ek->add_option("--folds", ka.folds, "cross-validation folds (default 10)");
    ek->add_flag("--transpose", ka.transpose, "randomly transpose pairs before classification");
    ek->add_option("--seed", ka.seed, "RNG seed for transposition/subsampling");
    ek->add_option("--max-pairs", ka.max_pairs, "deterministic subsample cap (0 = all)");

    // cluster-matrix
    std::string cm_model, cm_out, cm_pgm;
    std::vector<std::string> cm_data;
    auto* cm = app.add_subcommand("cluster-matrix", "interval cluster-distance matrix in mapping space");
    cm->add_option("--model", cm_model, "checkpoint")->required();
    cm->add_option("--data", cm_data, "piece containers")->required();
    cm->add_option("--out", cm_out, "matrix CSV")->required();
    cm->add_option("--pgm", cm_pgm, "grayscale PGM image (bright = close)");

    // sensitivity
    std::string se_model, se_out;
    std::vector<std::string> se_data;
    auto* se = app.add_subcommand("sensitivity", "per-context-frame sensitivity profile");
    se->add_option("--model", se_model, "checkpoint")->required();
    se->add_option("--data", se_data, "piece containers")->required();
    se->add_option("--out", se_out, "profile CSV")->required();

    // eval-sections
    std::string es_found, es_truth, es_out;
    auto* es = app.add_subcommand("eval-sections", "score found section groups against ground truth");
    es->add_option("--found", es_found, "sections text file")->required();
    es->add_option("--truth", es_truth, "sections text file")->required();
    es->add_option("--out", es_out, "report CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        if (im->parsed()) return cmd_ingest_midi(im_inputs, im_out);
        if (ia->parsed()) return cmd_ingest_audio(ia_in, ia_out, ia_rate);
        if (tr->parsed()) {
            if (*ta_seed_opt) ta.seed = ta_seed;
            if (*ta_steps_opt) ta.steps = ta_steps;
            return cmd_train(ta);
        }
        if (mp->parsed()) return cmd_map(mp_model, mp_in, mp_out);
        if (sm->parsed()) return cmd_ssm(sm_in, sm_out, sm_pgm);
        if (dc->parsed()) {
            if (*da_gamma_opt) da.gamma = da_gamma;
            if (*da_min_opt) da.min_len = da_min_len;
            if (*da_tol_opt) da.merge_tol = da_merge_tol;
            return cmd_discover(da);
        }
        if (ek->parsed()) return cmd_eval_knn(ka);
        if (cm->parsed()) return cmd_cluster_matrix(cm_model, cm_data, cm_out, cm_pgm);
        if (se->parsed()) return cmd_sensitivity(se_model, se_data, se_out);
        if (es->parsed()) return cmd_eval_sections(es_found, es_truth, es_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
