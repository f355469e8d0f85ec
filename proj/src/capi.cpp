#include "leelab/leelab.h"

#include <new>
#include <string>

#include "leelab/error.hpp"
#include "leelab/principal.hpp"
#include "leelab/runner.hpp"
#include "leelab/spectral.hpp"

struct leelab_session {
  leelab::RunConfig config;
  std::string canonical;
};

struct leelab_result {
  leelab::RunOutcome outcome;
  std::string payload;
};

namespace {

thread_local std::string last_error;

leelab_status to_status(leelab::ErrorCode code) {
  switch (code) {
    case leelab::ErrorCode::invalid_argument: return LEELAB_INVALID_ARGUMENT;
    case leelab::ErrorCode::domain_violation: return LEELAB_DOMAIN_VIOLATION;
    case leelab::ErrorCode::ceiling_exceeded: return LEELAB_CEILING_EXCEEDED;
    case leelab::ErrorCode::no_convergence: return LEELAB_NO_CONVERGENCE;
    case leelab::ErrorCode::no_sign_change: return LEELAB_NO_SIGN_CHANGE;
    case leelab::ErrorCode::singular: return LEELAB_SINGULAR;
    case leelab::ErrorCode::config_error: return LEELAB_CONFIG_ERROR;
    case leelab::ErrorCode::io_error: return LEELAB_IO_ERROR;
    case leelab::ErrorCode::assertion_failed: return LEELAB_ASSERTION_FAILED;
  }
  return LEELAB_INTERNAL_ERROR;
}

template <class F>
leelab_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return LEELAB_OK;
  } catch (const leelab::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown failure";
  }
  return LEELAB_INTERNAL_ERROR;
}

leelab_status null_argument(const char* what) {
  last_error = std::string("null argument: ") + what;
  return LEELAB_INVALID_ARGUMENT;
}

leelab::Model session_model(const leelab_session* s) {
  const auto& c = s->config;
  return leelab::Model(leelab::build_catalog(c.manifold, c.truncation.lambda_cutoff, c.model.mass,
                                             c.truncation.prune_uncoupled,
                                             c.truncation.mode_ceiling),
                       c.model);
}

leelab_session* make_session(leelab::RunConfig config) {
  auto* s = new leelab_session{std::move(config), {}};
  s->canonical = leelab::to_json(s->config).dump();
  return s;
}

}  // namespace

extern "C" {

const char* leelab_version(void) { return leelab::version(); }

const char* leelab_status_string(leelab_status status) {
  switch (status) {
    case LEELAB_OK: return "ok";
    case LEELAB_INTERNAL_ERROR: return "internal_error";
    default:
      if (status >= LEELAB_INVALID_ARGUMENT && status <= LEELAB_ASSERTION_FAILED)
        return leelab::to_string(static_cast<leelab::ErrorCode>(status));
  }
  return "unknown";
}

const char* leelab_last_error(void) { return last_error.c_str(); }

void leelab_run_options_init(leelab_run_options* options) {
  if (!options) return;
  options->oracle = 0;
  options->use_cache = 1;
  options->threads = 1;
  options->output_directory = nullptr;
}

leelab_status leelab_session_create(const char* config_json, leelab_session** out) {
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    const std::string text = config_json && *config_json ? config_json : "{}";
    *out = make_session(leelab::parse_config(text));
  });
}

leelab_status leelab_session_create_from_file(const char* path, leelab_session** out) {
  if (!out) return null_argument("out");
  if (!path) return null_argument("path");
  *out = nullptr;
  return guarded([&] { *out = make_session(leelab::load_config(path)); });
}

void leelab_session_destroy(leelab_session* session) { delete session; }

const char* leelab_session_config(const leelab_session* session) {
  return session ? session->canonical.c_str() : "";
}

int leelab_command_count(void) { return int(leelab::command_names().size()); }

const char* leelab_command_name(int index) {
  const auto& names = leelab::command_names();
  if (index < 0 || index >= int(names.size())) return nullptr;
  return names[std::size_t(index)].c_str();
}

leelab_status leelab_run(leelab_session* session, const char* command,
                         const leelab_run_options* options, leelab_result** out) {
  if (!out) return null_argument("out");
  *out = nullptr;
  if (!session) return null_argument("session");
  if (!command) return null_argument("command");
  return guarded([&] {
    leelab::RunOptions opt;
    if (options) {
      opt.oracle = options->oracle != 0;
      opt.use_cache = options->use_cache != 0;
      leelab::require(options->threads >= 1, "threads must be at least 1");
      opt.threads = options->threads;
      if (options->output_directory) opt.output_directory = options->output_directory;
    }
    auto* r = new leelab_result;
    try {
      r->outcome = leelab::run_command(command, session->config, opt);
      r->payload = r->outcome.payload.dump();
    } catch (...) {
      delete r;
      throw;
    }
    *out = r;
  });
}

void leelab_result_destroy(leelab_result* result) { delete result; }

const char* leelab_result_payload(const leelab_result* result) {
  return result ? result->payload.c_str() : "";
}

const char* leelab_result_failure(const leelab_result* result) {
  return result ? result->outcome.failure.c_str() : "";
}

const char* leelab_result_directory(const leelab_result* result) {
  return result ? result->outcome.directory.c_str() : "";
}

const char* leelab_result_config_hash(const leelab_result* result) {
  return result ? result->outcome.config_hash.c_str() : "";
}

int leelab_result_passed(const leelab_result* result) {
  return result && result->outcome.passed ? 1 : 0;
}

int leelab_result_from_cache(const leelab_result* result) {
  return result && result->outcome.from_cache ? 1 : 0;
}

leelab_status leelab_bare_mass(const leelab_session* session, double* out) {
  if (!session) return null_argument("session");
  if (!out) return null_argument("out");
  return guarded([&] { *out = leelab::bare_mass(session_model(session)).bare_mass; });
}

leelab_status leelab_ground_energy(const leelab_session* session, double* out) {
  if (!session) return null_argument("session");
  if (!out) return null_argument("out");
  return guarded([&] {
    const auto model = session_model(session);
    const auto sector = leelab::enumerate_sector(model.catalog(), model.n(),
                                                 session->config.truncation.sector_ceiling);
    leelab::GroundEnergyOptions go;
    go.spectral.dense_ceiling = session->config.truncation.dense_ceiling;
    *out = leelab::ground_energy(model, sector, go).E_gr;
  });
}

leelab_status leelab_heat_kernel(const leelab_session* session, double t, double* out) {
  if (!session) return null_argument("session");
  if (!out) return null_argument("out");
  return guarded([&] { *out = leelab::heat_kernel_diag(session->config.manifold, t); });
}

}  // extern "C"
