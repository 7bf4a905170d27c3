namespace N { delegate void Ping(int count); }
