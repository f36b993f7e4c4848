#include "ptsa/store.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "ptsa/errors.hpp"

namespace ptsa {

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

StoredSample make_row(const MarginSample& s, const std::string& run_id, int level, int chain,
                      int step, bool is_seed) {
    StoredSample row;
    row.run_id = run_id;
    row.level = level;
    row.chain = chain;
    row.step = step;
    row.u = to_std(s.point.u);
    row.x = to_std(s.point.x);
    row.ptsm_cycles = s.ptsm_cycles;
    row.is_seed = is_seed;
    return row;
}

}  // namespace

std::vector<StoredSample> store_rows_from_subsim(const SubSimResult& result,
                                                 const std::string& run_id) {
    std::vector<StoredSample> rows;
    if (result.levels.empty()) return rows;

    // chain layout of levels >= 2 recovered from the first level's seed count
    const int n_bat = static_cast<int>(result.levels.front().samples.size());
    const int n_s = static_cast<int>(result.levels.front().seed_indices.size());
    const int states_per_chain = n_s > 0 ? n_bat / n_s : 0;

    for (const LevelRecord& rec : result.levels) {
        std::vector<char> promoted(rec.samples.size(), 0);
        for (int idx : rec.seed_indices) promoted[static_cast<size_t>(idx)] = 1;
        for (int i = 0; i < static_cast<int>(rec.samples.size()); ++i) {
            int chain = -1, step = i;
            if (rec.level > 1) {
                chain = i / states_per_chain;
                step = i % states_per_chain;
            }
            rows.push_back(make_row(rec.samples[static_cast<size_t>(i)], run_id, rec.level,
                                    chain, step, promoted[static_cast<size_t>(i)] != 0));
        }
    }
    return rows;
}

std::vector<StoredSample> store_rows_from_dmc(const DmcResult& result, const std::string& run_id) {
    if (result.samples.empty() && result.n > 0)
        throw Error(ErrorCode::invalid_argument,
                    "dmc run did not keep its samples; rerun with sample retention");
    std::vector<StoredSample> rows;
    rows.reserve(result.samples.size());
    for (int i = 0; i < static_cast<int>(result.samples.size()); ++i)
        rows.push_back(make_row(result.samples[static_cast<size_t>(i)], run_id, 1, -1, i, false));
    return rows;
}

void write_store_jsonl(const std::string& path, const std::vector<StoredSample>& rows,
                       bool append) {
    std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot open '" + path + "' for writing");
    for (const StoredSample& row : rows) {
        nlohmann::json j{{"run_id", row.run_id}, {"level", row.level}, {"chain", row.chain},
                         {"step", row.step},     {"u", row.u},         {"x", row.x},
                         {"ptsm_cycles", row.ptsm_cycles},             {"is_seed", row.is_seed}};
        out << j.dump() << '\n';
    }
    if (!out) throw Error(ErrorCode::io, "write to '" + path + "' failed");
}

std::vector<StoredSample> read_store_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open '" + path + "' for reading");
    std::vector<StoredSample> rows;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
            StoredSample row;
            row.run_id = j.at("run_id").get<std::string>();
            row.level = j.at("level").get<int>();
            row.chain = j.at("chain").get<int>();
            row.step = j.at("step").get<int>();
            row.u = j.at("u").get<std::vector<double>>();
            row.x = j.at("x").get<std::vector<double>>();
            row.ptsm_cycles = j.at("ptsm_cycles").get<double>();
            row.is_seed = j.at("is_seed").get<bool>();
            rows.push_back(std::move(row));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::parse,
                        "'" + path + "' line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return rows;
}

std::vector<StoredSample> retained_rows(const std::vector<StoredSample>& rows) {
    std::vector<StoredSample> out;
    for (const StoredSample& row : rows)
        if (!row.is_seed) out.push_back(row);
    return out;
}

std::vector<MarginSample> samples_from_rows(const std::vector<StoredSample>& rows) {
    std::vector<MarginSample> out;
    out.reserve(rows.size());
    for (const StoredSample& row : rows) {
        MarginSample s;
        s.point.u = Eigen::Map<const Eigen::VectorXd>(row.u.data(),
                                                      static_cast<Eigen::Index>(row.u.size()));
        s.point.x = Eigen::Map<const Eigen::VectorXd>(row.x.data(),
                                                      static_cast<Eigen::Index>(row.x.size()));
        s.ptsm_cycles = row.ptsm_cycles;
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace ptsa
