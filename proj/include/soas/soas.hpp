#ifndef SOAS_SOAS_HPP
#define SOAS_SOAS_HPP

// Umbrella header for the whole broker pipeline.

#include "soas/agent.hpp"
#include "soas/broker.hpp"
#include "soas/client.hpp"
#include "soas/config.hpp"
#include "soas/errors.hpp"
#include "soas/kb.hpp"
#include "soas/message.hpp"
#include "soas/net.hpp"
#include "soas/ranking.hpp"
#include "soas/registry.hpp"
#include "soas/registry_server.hpp"
#include "soas/render.hpp"
#include "soas/request.hpp"
#include "soas/runtime.hpp"
#include "soas/store.hpp"
#include "soas/text.hpp"

#endif
