#pragma once

#include "storybuddy/service/app.hpp"

namespace httplib {
class Server;
}

namespace storybuddy::service {

// Binds every REST route of the service onto the server.
void register_routes(httplib::Server& server, StoryBuddyService& service);

}  // namespace storybuddy::service
