#ifndef TIMR_CONFIG_HPP
#define TIMR_CONFIG_HPP

// Flat key=value run configuration covering model, trainer and discovery
// parameters. Unknown keys are rejected so a typo cannot silently fall back
// to a default. CLI flags are applied after the file and win.

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "timr/gae.hpp"
#include "timr/trainer.hpp"

namespace timr::io {

struct RunConfig {
    // model; unset fields fall back to per-domain defaults at train time
    std::optional<std::size_t> input_dim;
    std::optional<std::size_t> context_frames;
    std::optional<std::size_t> factor_dim;
    std::optional<std::size_t> map_dim_1;
    std::optional<std::size_t> map_dim_2;
    std::optional<gae::OutputKind> output_kind;
    std::optional<int> shift_range;

    // trainer
    std::optional<long> total_steps;
    std::optional<std::size_t> batch_size;
    std::optional<double> lr_start;
    std::optional<double> lr_end;
    std::optional<double> dropout_p;
    std::optional<double> l2_weight;
    std::optional<double> sparsity_weight;
    std::optional<double> norm_dev_weight;
    std::optional<double> max_col_norm;
    std::optional<std::uint64_t> seed;
    std::optional<long> checkpoint_every;

    // discovery
    std::optional<double> gamma;
    std::optional<std::size_t> min_len;
    std::optional<std::size_t> merge_tol;

    void set(const std::string& key, const std::string& value) {
        try {
            if (key == "input_dim") input_dim = std::stoul(value);
            else if (key == "context_frames") context_frames = std::stoul(value);
            else if (key == "factor_dim") factor_dim = std::stoul(value);
            else if (key == "map_dim_1") map_dim_1 = std::stoul(value);
            else if (key == "map_dim_2") map_dim_2 = std::stoul(value);
            else if (key == "output_kind") output_kind = gae::output_kind_from_string(value);
            else if (key == "shift_range") shift_range = std::stoi(value);
            else if (key == "total_steps") total_steps = std::stol(value);
            else if (key == "batch_size") batch_size = std::stoul(value);
            else if (key == "lr_start") lr_start = std::stod(value);
            else if (key == "lr_end") lr_end = std::stod(value);
            else if (key == "dropout_p") dropout_p = std::stod(value);
            else if (key == "l2_weight") l2_weight = std::stod(value);
            else if (key == "sparsity_weight") sparsity_weight = std::stod(value);
            else if (key == "norm_dev_weight") norm_dev_weight = std::stod(value);
            else if (key == "max_col_norm") max_col_norm = std::stod(value);
            else if (key == "seed") seed = std::stoull(value);
            else if (key == "checkpoint_every") checkpoint_every = std::stol(value);
            else if (key == "gamma") gamma = std::stod(value);
            else if (key == "min_len") min_len = std::stoul(value);
            else if (key == "merge_tol") merge_tol = std::stoul(value);
            else throw std::runtime_error("config: unknown key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw std::runtime_error("config: bad value '" + value + "' for key '" + key + "'");
        } catch (const std::out_of_range&) {
            throw std::runtime_error("config: value out of range for key '" + key + "'");
        }
    }

    void load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("config: cannot open " + path.string());
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            // trim
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos) continue;
            const auto last = line.find_last_not_of(" \t\r");
            line = line.substr(first, last - first + 1);
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error("config: expected key=value at line " + std::to_string(lineno));
            auto strip = [](std::string s) {
                const auto a = s.find_first_not_of(" \t");
                const auto b = s.find_last_not_of(" \t");
                return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
            };
            set(strip(line.substr(0, eq)), strip(line.substr(eq + 1)));
        }
    }

    gae::ModelConfig model_config(const gae::ModelConfig& defaults) const {
        gae::ModelConfig mc = defaults;
        if (input_dim) mc.input_dim = *input_dim;
        if (context_frames) mc.context_frames = *context_frames;
        if (factor_dim) mc.factor_dim = *factor_dim;
        if (map_dim_1) mc.map_dim_1 = *map_dim_1;
        if (map_dim_2) mc.map_dim_2 = *map_dim_2;
        if (output_kind) mc.output_kind = *output_kind;
        if (shift_range) mc.shift_range = *shift_range;
        return mc;
    }

    train::TrainConfig train_config() const {
        train::TrainConfig tc;
        if (total_steps) tc.total_steps = *total_steps;
        if (batch_size) tc.batch_size = *batch_size;
        if (lr_start) tc.lr_start = *lr_start;
        if (lr_end) tc.lr_end = *lr_end;
        if (dropout_p) tc.dropout_p = *dropout_p;
        if (l2_weight) tc.l2_weight = *l2_weight;
        if (sparsity_weight) tc.sparsity_weight = *sparsity_weight;
        if (norm_dev_weight) tc.norm_dev_weight = *norm_dev_weight;
        if (max_col_norm) tc.max_col_norm = *max_col_norm;
        if (seed) tc.seed = *seed;
        if (checkpoint_every) tc.checkpoint_every = *checkpoint_every;
        return tc;
    }
};

} // namespace timr::io

#endif // TIMR_CONFIG_HPP
