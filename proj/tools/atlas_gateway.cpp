// atlas_gateway: HTTP service over a directory of ontology files.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "readloop/gateway_http.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Ontology curation gateway"};
    std::string root;
    if (const char* env = std::getenv("READLOOP_CONTENT_ROOT")) root = env;
    std::string host = "127.0.0.1";
    int port = 8080;
    app.add_option("--root", root, "Directory of <subject>.yaml files (default: $READLOOP_CONTENT_ROOT)");
    app.add_option("--host", host, "Bind address");
    app.add_option("--port", port, "Port");
    CLI11_PARSE(app, argc, argv);
    if (root.empty()) {
        std::cerr << "error: no content root; set READLOOP_CONTENT_ROOT or pass --root\n";
        return 2;
    }
    try {
        readloop::gateway::Service service(root);
        httplib::Server server;
        readloop::gateway::mount(server, service);
        std::cout << "serving " << root << " on http://" << host << ":" << port << "\n";
        if (!server.listen(host, port)) {
            std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
            return 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
