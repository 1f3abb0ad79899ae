// SPDX-License-Identifier: Apache-2.0
#pragma once

// Local circumferential wall strain (eps = dR / R) on vessel-wall point
// clouds from gridded displacement fields, with controlled Gaussian
// perturbation of the geometry along surface normals and identity-line
// agreement statistics. Header-only.

#include "wallstrain/core.hpp"
#include "wallstrain/displacement_field.hpp"
#include "wallstrain/io.hpp"
#include "wallstrain/local_frame.hpp"
#include "wallstrain/metrics.hpp"
#include "wallstrain/neighbor_index.hpp"
#include "wallstrain/perturbation.hpp"
#include "wallstrain/phantoms.hpp"
#include "wallstrain/point_cloud.hpp"
#include "wallstrain/rng.hpp"
#include "wallstrain/strain.hpp"
