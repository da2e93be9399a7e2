// Copyright 2026 The t2va Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>

#include "t2va/error.hpp"
#include "t2va/http_transport.hpp"
#include "t2va/mock_victim.hpp"
#include "t2va/scorer.hpp"
#include "t2va/stdio_transport.hpp"

namespace t2va {

/// Resolves a scorer URI: `http://host:port`, `https://...`,
/// `stdio:<command>` or `mock:<spec-file>`.
inline std::shared_ptr<Transport> make_transport(const std::string& uri) {
  auto starts = [&](std::string_view p) { return uri.rfind(p, 0) == 0; };
  if (starts("http://") || starts("https://")) {
    return std::make_shared<HttpTransport>(uri);
  }
  if (starts("stdio:")) {
    return std::make_shared<StdioTransport>(uri.substr(6));
  }
  if (starts("mock:")) {
    return std::make_shared<InProcessTransport>(
        std::make_shared<MockVictim>(MockVictimSpec::load(uri.substr(5))));
  }
  throw Error(ErrorCode::kInvalidConfig, "unrecognized scorer URI '" + uri + "'");
}

}  // namespace t2va
