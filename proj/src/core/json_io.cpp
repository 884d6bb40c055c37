#include "json_io.hpp"
