#pragma once

#include <string>

#include "streakforge/corpus.hpp"
#include "streakforge/pipeline/config.hpp"

namespace streakforge {

/// Smoothing window of the dossier tracks: max(1, round(0.05 * n_total)).
std::size_t dossier_window(std::size_t n_total);

/// JSON dossier of one author: impact sequence with top flags, spans under
/// the primary parameters, and smoothed team-size, co-author-frequency and
/// topic-diversity tracks. Throws DataError for an unknown author.
std::string author_dossier(const CorpusStore& store, const std::string& author_id, const PipelineConfig& config);

/// Topic seed shared by the classify stage and the dossier.
std::uint64_t topic_seed(const PipelineConfig& config, const std::string& author_id);

}  // namespace streakforge
