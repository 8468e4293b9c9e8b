#pragma once

#include "floquet_avg/error.hpp"
#include "floquet_avg/smallmat.hpp"
#include "floquet_avg/ppoly.hpp"
#include "floquet_avg/averaging.hpp"
#include "floquet_avg/exactmono.hpp"
#include "floquet_avg/pendulum.hpp"
#include "floquet_avg/stability.hpp"
#include "floquet_avg/scan.hpp"
#include "floquet_avg/model.hpp"
#include "floquet_avg/report.hpp"
