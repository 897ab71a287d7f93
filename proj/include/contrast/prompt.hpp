// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The contrast authors

#pragma once

namespace contrast {

/// Instruction used to obtain the model's own comprehensive description of
/// the visual input.
inline constexpr const char* kDescriptionPrompt =
    "Provide a detailed description of the image, covering all visible elements and their "
    "interactions, so as to thoroughly answer any potential questions about the image.";

}  // namespace contrast
