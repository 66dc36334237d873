// Wraps a 12-bit ramp at 8 bits and recovers it with the Poisson unwrapper.

#include <modspike/modspike.hpp>

#include <algorithm>
#include <iostream>

int main()
{
    using namespace modspike;

    const HdrImage truth = horizontal_ramp(64, 512, 0.0, 8.0);
    const ModuloFrame wrapped = wrap_image(truth, 8);
    const UnwrapResult result = unwrap_poisson(wrapped);

    std::cout << "exact=" << (result.hdr == truth ? "yes" : "no") << '\n'
              << "max_rollover=" << *std::max_element(result.rollover.begin(), result.rollover.end()) << '\n'
              << "psnr_l=" << psnr_linear(truth, result.hdr) << '\n';
    return result.hdr == truth ? 0 : 1;
}
