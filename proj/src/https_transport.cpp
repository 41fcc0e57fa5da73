#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "adelic/error.hpp"
#include "adelic/newforms.hpp"

namespace adelic {

namespace {

class HttpsTransport : public Transport {
public:
    HttpResponse get(const std::string& host, const std::string& path) override {
        httplib::SSLClient cli(host, 443);
        cli.set_connection_timeout(20);
        cli.set_read_timeout(60);
        auto res = cli.Get(path);
        if (!res) throw Error(ErrorCode::FetchError, "request to " + host + " failed: " + httplib::to_string(res.error()));
        return {res->status, res->body};
    }
};

}  // namespace

std::unique_ptr<Transport> make_https_transport() { return std::make_unique<HttpsTransport>(); }

}  // namespace adelic
