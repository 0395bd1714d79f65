#pragma once

// clang-format off
#define PRPC_VERSION_MAJOR 0
#define PRPC_VERSION_MINOR 1
#define PRPC_VERSION_PATCH 0
#define PRPC_VERSION "0.1.0"
// clang-format on
