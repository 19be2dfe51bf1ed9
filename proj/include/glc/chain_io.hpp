#pragma once

#include <string>

#include "glc/chain.hpp"

namespace glc {

// Chain JSON schema:
//   { "dim": q, "group": kind,
//     "cells": [ { "geom": [[x,y,z],...], "mult": [ints] } ] }
// geom holds one point for q = 0 and two for q = 1, with ambient-many
// coordinates each.
std::string chain_to_json(const PolyChain& chain);
PolyChain chain_from_json(const std::string& text);

void save_chain(const PolyChain& chain, const std::string& path);
PolyChain load_chain(const std::string& path);

}  // namespace glc
