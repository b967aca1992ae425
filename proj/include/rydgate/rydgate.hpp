#pragma once

#include "rydgate/analytics.hpp"
#include "rydgate/atomdata.hpp"
#include "rydgate/cli.hpp"
#include "rydgate/constants.hpp"
#include "rydgate/dynamics.hpp"
#include "rydgate/error.hpp"
#include "rydgate/ini.hpp"
#include "rydgate/numfmt.hpp"
#include "rydgate/parallel.hpp"
#include "rydgate/report.hpp"
#include "rydgate/schedule.hpp"
