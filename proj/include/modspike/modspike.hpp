#ifndef MODSPIKE_MODSPIKE_HPP
#define MODSPIKE_MODSPIKE_HPP

#include <modspike/core_types.hpp>
#include <modspike/lar_ops.hpp>
#include <modspike/spike_sim.hpp>
#include <modspike/modulo_encoder.hpp>
#include <modspike/unwrapper.hpp>
#include <modspike/metrics.hpp>
#include <modspike/io.hpp>
#include <modspike/config.hpp>
#include <modspike/scenes.hpp>

#endif // MODSPIKE_MODSPIKE_HPP
