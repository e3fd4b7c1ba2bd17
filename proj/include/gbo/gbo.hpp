#ifndef GBO_GBO_HPP
#define GBO_GBO_HPP

#include "gbo/acquisition.hpp"
#include "gbo/bo.hpp"
#include "gbo/embedding.hpp"
#include "gbo/errors.hpp"
#include "gbo/experiment.hpp"
#include "gbo/features.hpp"
#include "gbo/generators.hpp"
#include "gbo/gp.hpp"
#include "gbo/graph.hpp"
#include "gbo/graph_io.hpp"
#include "gbo/graphlets.hpp"
#include "gbo/hyperopt.hpp"
#include "gbo/kernels.hpp"
#include "gbo/nelder_mead.hpp"
#include "gbo/objectives.hpp"
#include "gbo/random.hpp"
#include "gbo/traffic.hpp"

#endif  // GBO_GBO_HPP
