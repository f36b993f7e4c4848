#pragma once

#include <string>
#include <vector>

#include "ptsa/subsim.hpp"

namespace ptsa {

/// One serialized sample: a line of the JSONL store. iid draws use chain = -1
/// and step = draw index; chain states use step 0 for the seed copy.
/// is_seed marks samples promoted to seed the following level; dropping those
/// rows recovers the retained set.
struct StoredSample {
    std::string run_id;
    int level = 1;
    int chain = -1;
    int step = 0;
    std::vector<double> u;
    std::vector<double> x;
    double ptsm_cycles = 0.0;
    bool is_seed = false;
};

std::vector<StoredSample> store_rows_from_subsim(const SubSimResult& result,
                                                 const std::string& run_id);

/// Requires the DMC run to have kept its samples.
std::vector<StoredSample> store_rows_from_dmc(const DmcResult& result, const std::string& run_id);

void write_store_jsonl(const std::string& path, const std::vector<StoredSample>& rows,
                       bool append = false);

std::vector<StoredSample> read_store_jsonl(const std::string& path);

/// Rows that survive seed promotion; for a SubSim store this is exactly the
/// retained set, for a DMC store it is everything.
std::vector<StoredSample> retained_rows(const std::vector<StoredSample>& rows);

/// Back-conversion for replayed analysis.
std::vector<MarginSample> samples_from_rows(const std::vector<StoredSample>& rows);

}  // namespace ptsa
