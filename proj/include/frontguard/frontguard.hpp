#pragma once

#include "frontguard/analysis.hpp"
#include "frontguard/bimatrix.hpp"
#include "frontguard/chain.hpp"
#include "frontguard/contest.hpp"
#include "frontguard/digest.hpp"
#include "frontguard/error.hpp"
#include "frontguard/game.hpp"
#include "frontguard/oracle.hpp"
#include "frontguard/protocol_equilibrium.hpp"
#include "frontguard/scenario.hpp"
#include "frontguard/simulation.hpp"
#include "frontguard/verify.hpp"
