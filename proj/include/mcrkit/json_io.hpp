#pragma once

#include "mcrkit/bilinear.hpp"
#include "mcrkit/kinetics.hpp"
#include "mcrkit/speciation.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mcr {

// Loaders raise InputError whose message starts with the JSON pointer of the
// offending value, e.g. "/reactions/1/k: expected a positive number".

struct ReactionDocument {
    ReactionSystem system;
    std::vector<DoseSchedule> doses;
    std::optional<std::string> grid;
};

ReactionDocument parse_reaction_document(const std::string& text);
SpectrumSet parse_spectrum_set(const std::string& text);

struct EquilibriumDocument {
    EquilibriumModel model;
    TitrationProtocol protocol;
};

EquilibriumDocument parse_equilibrium_document(const std::string& text);

}  // namespace mcr
